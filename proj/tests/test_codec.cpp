#include "doctest.h"

#include <functional>
#include <vector>

#include "slab/codec.hpp"
#include "slab/rng.hpp"

using namespace slab;

namespace {

bool raises(errc expected, const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code() == expected;
    }
    return false;
}

Eigen::MatrixXd random_matrix(CounterRng& rng, int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) m(r, c) = rng.next_uniform(-1.0, 1.0);
    }
    return m;
}

// Walks all k-subsets of [0, n), calling fn on each.
void for_each_subset(int n, int k, const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> subset(k);
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == k) {
            fn(subset);
            return;
        }
        for (int i = start; i <= n - (k - depth); ++i) {
            subset[depth] = i;
            rec(i + 1, depth + 1);
        }
    };
    rec(0, 0);
}

} // namespace

TEST_CASE("rate-1 generator is the identity") {
    const auto gen = mds_generator(4, 4, 1);
    CHECK(gen.systematic);
    CHECK(gen.coeffs == Eigen::MatrixXd::Identity(4, 4));
}

TEST_CASE("generator construction is deterministic in the seed") {
    const auto a = mds_generator(8, 5, 3);
    const auto b = mds_generator(8, 5, 3);
    const auto c = mds_generator(8, 5, 4);
    CHECK(a.coeffs == b.coeffs);
    CHECK(a.coeffs != c.coeffs);
    CHECK(raises(errc::invalid_dims, [] { mds_generator(2, 3, 1); }));
    CHECK(raises(errc::invalid_dims, [] { mds_generator(3, 0, 1); }));
}

TEST_CASE("every k-subset of rows is invertible") {
    // (3,2): all 3 pairs; (10,5): all 252 subsets.
    for (auto [n, k] : std::vector<std::pair<int, int>>{{3, 2}, {10, 5}}) {
        const auto gen = mds_generator(n, k, 7);
        int checked = 0;
        for_each_subset(n, k, [&](const std::vector<int>& rows) {
            Eigen::MatrixXd sub(k, k);
            for (int i = 0; i < k; ++i) sub.row(i) = gen.coeffs.row(rows[i]);
            CHECK(sub.fullPivLu().rank() == k);
            ++checked;
        });
        CHECK(checked == (n == 3 ? 3 : 252));
    }
}

TEST_CASE("group_encode splits row blocks over groups in order") {
    const auto system = new_group_system({3, 4}, {1.0, 2.0});
    const Allocation alloc{{2, 3}, 5};
    CounterRng rng(5, 0, 0, 0);
    const Eigen::MatrixXd A = random_matrix(rng, 10, 4);

    const auto assignment = group_encode(A, system, alloc, 11);
    CHECK(assignment.block_rows == 2);
    CHECK(assignment.cols == 4);
    CHECK(assignment.blocks[0].size() == 3);
    CHECK(assignment.blocks[1].size() == 4);
    CHECK(assignment.source_offset == std::vector<int>{0, 2});

    // Systematic workers hold the uncoded blocks verbatim.
    CHECK(assignment.blocks[0][0] == A.middleRows(0, 2));
    CHECK(assignment.blocks[0][1] == A.middleRows(2, 2));
    CHECK(assignment.blocks[1][0] == A.middleRows(4, 2));
    CHECK(assignment.blocks[1][1] == A.middleRows(6, 2));
    CHECK(assignment.blocks[1][2] == A.middleRows(8, 2));

    CHECK(raises(errc::indivisible_rows, [&] {
        group_encode(random_matrix(rng, 11, 4), system, alloc, 11);
    }));
    CHECK(raises(errc::allocation_exceeds_group, [&] {
        group_encode(A, system, {{4, 1}, 5}, 11);
    }));
}

TEST_CASE("single group encode reduces to a plain MDS code") {
    const auto system = new_group_system({6}, {1.0});
    CounterRng rng(6, 0, 0, 0);
    const Eigen::MatrixXd A = random_matrix(rng, 8, 3);
    const auto assignment = group_encode(A, system, {{4}, 4}, 2);
    const auto gen = mds_generator(6, 4, derive_seed(2, 0));
    for (int j = 0; j < 6; ++j) {
        Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(2, 3);
        for (int c = 0; c < 4; ++c) expect += gen.coeffs(j, c) * A.middleRows(2 * c, 2);
        CHECK((assignment.blocks[0][j] - expect).norm() < 1e-12);
    }
}

TEST_CASE("all-systematic decode returns inputs verbatim") {
    const auto gen = mds_generator(6, 3, 9);
    CounterRng rng(7, 0, 0, 0);
    std::vector<std::pair<int, Eigen::MatrixXd>> results;
    for (int r : {2, 0, 1}) results.emplace_back(r, random_matrix(rng, 4, 1));
    const auto sources = decode_from_subset(results, gen);
    CHECK(sources[2] == results[0].second);
    CHECK(sources[0] == results[1].second);
    CHECK(sources[1] == results[2].second);
}

TEST_CASE("parity-only subset recovers the sources") {
    // (3,2) code, receive the second and third rows.
    const auto gen = mds_generator(3, 2, 13);
    CounterRng rng(8, 0, 0, 0);
    const Eigen::MatrixXd s0 = random_matrix(rng, 5, 1);
    const Eigen::MatrixXd s1 = random_matrix(rng, 5, 1);
    std::vector<std::pair<int, Eigen::MatrixXd>> results;
    results.emplace_back(1, s1);
    results.emplace_back(2, gen.coeffs(2, 0) * s0 + gen.coeffs(2, 1) * s1);
    const auto sources = decode_from_subset(results, gen);
    CHECK((sources[0] - s0).norm() / s0.norm() < 1e-10);
    CHECK((sources[1] - s1).norm() / s1.norm() < 1e-10);
}

TEST_CASE("decode input validation") {
    const auto gen = mds_generator(4, 2, 1);
    CounterRng rng(9, 0, 0, 0);
    const Eigen::MatrixXd v = random_matrix(rng, 3, 1);
    CHECK(raises(errc::insufficient_results, [&] {
        decode_from_subset({{0, v}}, gen);
    }));
    // Duplicate rows do not count toward the quota.
    CHECK(raises(errc::insufficient_results, [&] {
        decode_from_subset({{1, v}, {1, v}}, gen);
    }));
    CHECK(raises(errc::index_out_of_range, [&] {
        decode_from_subset({{0, v}, {4, v}}, gen);
    }));
    CHECK(raises(errc::shape_mismatch, [&] {
        decode_from_subset({{0, v}, {1, random_matrix(rng, 2, 1)}}, gen);
    }));
}

TEST_CASE("every subset of a (10,5) instance decodes to 1e-8") {
    const int n = 10, k = 5;
    const auto gen = mds_generator(n, k, 17);
    CounterRng rng(10, 0, 0, 0);
    std::vector<Eigen::MatrixXd> sources;
    for (int c = 0; c < k; ++c) sources.push_back(random_matrix(rng, 6, 1));
    std::vector<Eigen::MatrixXd> coded(n);
    for (int r = 0; r < n; ++r) {
        coded[r] = Eigen::MatrixXd::Zero(6, 1);
        for (int c = 0; c < k; ++c) coded[r] += gen.coeffs(r, c) * sources[c];
    }
    double worst = 0.0;
    for_each_subset(n, k, [&](const std::vector<int>& rows) {
        std::vector<std::pair<int, Eigen::MatrixXd>> results;
        for (int r : rows) results.emplace_back(r, coded[r]);
        const auto decoded = decode_from_subset(results, gen);
        for (int c = 0; c < k; ++c) {
            worst = std::max(worst, (decoded[c] - sources[c]).norm() / sources[c].norm());
        }
    });
    CHECK(worst < 1e-8);
}

TEST_CASE("k-of-n recovery holds exhaustively up to n = 12") {
    CounterRng rng(16, 0, 0, 0);
    for (auto [n, k] : std::vector<std::pair<int, int>>{{6, 3}, {9, 4}, {12, 7}, {11, 11}}) {
        const auto gen = mds_generator(n, k, derive_seed(99, n, k));
        std::vector<Eigen::MatrixXd> sources;
        for (int c = 0; c < k; ++c) sources.push_back(random_matrix(rng, 3, 1));
        std::vector<Eigen::MatrixXd> coded(n);
        for (int r = 0; r < n; ++r) {
            coded[r] = Eigen::MatrixXd::Zero(3, 1);
            for (int c = 0; c < k; ++c) coded[r] += gen.coeffs(r, c) * sources[c];
        }
        for_each_subset(n, k, [&](const std::vector<int>& rows) {
            std::vector<std::pair<int, Eigen::MatrixXd>> results;
            for (int r : rows) results.emplace_back(r, coded[r]);
            const auto decoded = decode_from_subset(results, gen);
            for (int c = 0; c < k; ++c) {
                REQUIRE((decoded[c] - sources[c]).norm() / sources[c].norm() < 1e-6);
            }
        });
    }
}

TEST_CASE("large-k random subsets stay inside the decode contract") {
    const int n = 256, k = 128;
    const auto gen = mds_generator(n, k, 21);
    CounterRng rng(11, 0, 0, 0);
    Eigen::MatrixXd S = random_matrix(rng, k, 3);
    const Eigen::MatrixXd coded = gen.coeffs * S;
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<int> rows(n);
        for (int i = 0; i < n; ++i) rows[i] = i;
        for (int i = 0; i < k; ++i) {
            std::swap(rows[i], rows[i + static_cast<int>(rng.next_below(n - i))]);
        }
        std::vector<std::pair<int, Eigen::MatrixXd>> results;
        for (int i = 0; i < k; ++i) {
            results.emplace_back(rows[i], coded.row(rows[i]).transpose().eval());
        }
        const auto decoded = decode_from_subset(results, gen);
        for (int c = 0; c < k; ++c) {
            const double err = (decoded[c] - S.row(c).transpose()).norm() / S.row(c).norm();
            REQUIRE(err < 1e-6);
        }
    }
}

TEST_CASE("group_decode recovers Ax and reports the blocking group") {
    const auto system = new_group_system({3, 4}, {1.0, 2.0});
    const Allocation alloc{{2, 3}, 5};
    CounterRng rng(12, 0, 0, 0);
    const Eigen::MatrixXd A = random_matrix(rng, 10, 4);
    const Eigen::MatrixXd x = random_matrix(rng, 4, 1);
    const Eigen::MatrixXd direct = A * x;
    const auto assignment = group_encode(A, system, alloc, 3);

    auto worker_product = [&](int i, int j) { return assignment.blocks[i][j] * x; };
    auto results_for = [&](const std::vector<int>& g1, const std::vector<int>& g2) {
        std::vector<std::vector<std::pair<int, Eigen::MatrixXd>>> per_group(2);
        for (int j : g1) per_group[0].emplace_back(j, worker_product(0, j));
        for (int j : g2) per_group[1].emplace_back(j, worker_product(1, j));
        return per_group;
    };

    // Full reception.
    const auto everything = results_for({0, 1, 2}, {0, 1, 2, 3});
    CHECK((group_decode(everything, assignment) - direct).norm() / direct.norm() < 1e-6);

    // Fig. 2-style quota: workers {1,3} of group 1 and {1,2,4} of group 2.
    const auto quota = results_for({0, 2}, {0, 1, 3});
    CHECK((group_decode(quota, assignment) - direct).norm() / direct.norm() < 1e-6);

    // A group below quota blocks the decode no matter what the other sends.
    try {
        group_decode(results_for({0, 1, 2}, {0, 3}), assignment);
        FAIL("expected GroupShortfall");
    } catch (const Error& e) {
        CHECK(e.code() == errc::group_shortfall);
        CHECK(e.group() == 1);
    }
}

TEST_CASE("group recoverability is exactly the per-group quota rule") {
    const auto system = new_group_system({3, 4}, {1.0, 2.0});
    const Allocation alloc{{2, 3}, 5};
    CounterRng rng(14, 0, 0, 0);
    const Eigen::MatrixXd A = random_matrix(rng, 10, 2);
    const Eigen::MatrixXd x = random_matrix(rng, 2, 1);
    const Eigen::MatrixXd direct = A * x;
    const auto assignment = group_encode(A, system, alloc, 19);

    for (int mask1 = 0; mask1 < 8; ++mask1) {
        for (int mask2 = 0; mask2 < 16; ++mask2) {
            std::vector<std::vector<std::pair<int, Eigen::MatrixXd>>> per_group(2);
            for (int j = 0; j < 3; ++j) {
                if (mask1 & (1 << j)) per_group[0].emplace_back(j, assignment.blocks[0][j] * x);
            }
            for (int j = 0; j < 4; ++j) {
                if (mask2 & (1 << j)) per_group[1].emplace_back(j, assignment.blocks[1][j] * x);
            }
            const bool recoverable =
                __builtin_popcount(mask1) >= 2 && __builtin_popcount(mask2) >= 3;
            if (recoverable) {
                const auto out = group_decode(per_group, assignment);
                REQUIRE((out - direct).norm() / direct.norm() < 1e-6);
            } else {
                REQUIRE(raises(errc::group_shortfall,
                               [&] { group_decode(per_group, assignment); }));
            }
        }
    }
}

TEST_CASE("groups with zero allocation carry no blocks") {
    const auto system = new_group_system({3, 6}, {1.0, 2.0});
    const Allocation alloc{{0, 5}, 5};
    CounterRng rng(15, 0, 0, 0);
    const Eigen::MatrixXd A = random_matrix(rng, 10, 2);
    const auto assignment = group_encode(A, system, alloc, 23);
    CHECK(assignment.blocks[0].empty());
    CHECK(assignment.blocks[1].size() == 6);

    const Eigen::MatrixXd x = random_matrix(rng, 2, 1);
    std::vector<std::vector<std::pair<int, Eigen::MatrixXd>>> per_group(2);
    for (int j = 0; j < 5; ++j) per_group[1].emplace_back(j, assignment.blocks[1][j] * x);
    const Eigen::MatrixXd direct = A * x;
    CHECK((group_decode(per_group, assignment) - direct).norm() / direct.norm() < 1e-6);
}

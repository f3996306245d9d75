#include "slab/codec.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "slab/rng.hpp"

namespace slab {

namespace {

// The decode solve runs in quadruple precision: with eps(quad) ~ 1e-34 the
// reconstruction stays inside the published 1e-6 contract for condition
// numbers up to ~1e26, far past anything a random k-subset of these
// generators reaches at k <= 128.
using quad = __float128;
using MatrixXld = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

Eigen::Map<const Eigen::RowVectorXd> flat(const Eigen::MatrixXd& m) {
    return {m.data(), m.size()};
}

/// In-place partial-pivot Gaussian elimination on a p x p system with
/// `cols` right-hand sides, all row-major. Returns false on an exactly
/// singular pivot.
bool quad_solve(std::vector<quad>& M, std::vector<quad>& rhs, int p, int cols) {
    auto mag = [](quad v) { return v < 0 ? -v : v; };
    for (int col = 0; col < p; ++col) {
        int pivot = col;
        for (int r = col + 1; r < p; ++r) {
            if (mag(M[r * p + col]) > mag(M[pivot * p + col])) pivot = r;
        }
        if (M[pivot * p + col] == 0) return false;
        if (pivot != col) {
            for (int c = col; c < p; ++c) std::swap(M[col * p + c], M[pivot * p + c]);
            for (int c = 0; c < cols; ++c) std::swap(rhs[col * cols + c], rhs[pivot * cols + c]);
        }
        const quad inv = quad(1) / M[col * p + col];
        for (int r = col + 1; r < p; ++r) {
            const quad factor = M[r * p + col] * inv;
            if (factor == 0) continue;
            for (int c = col + 1; c < p; ++c) M[r * p + c] -= factor * M[col * p + c];
            for (int c = 0; c < cols; ++c) rhs[r * cols + c] -= factor * rhs[col * cols + c];
        }
    }
    for (int row = p - 1; row >= 0; --row) {
        for (int c = 0; c < cols; ++c) {
            quad acc = rhs[row * cols + c];
            for (int j = row + 1; j < p; ++j) acc -= M[row * p + j] * rhs[j * cols + c];
            rhs[row * cols + c] = acc / M[row * p + row];
        }
    }
    return true;
}

} // namespace

GeneratorMatrix mds_generator(int n, int k, std::uint64_t seed) {
    if (k < 1 || n < k) {
        raise(errc::invalid_dims, "need 1 <= k <= n, got n = " + std::to_string(n) +
                                      ", k = " + std::to_string(k));
    }
    GeneratorMatrix gen;
    gen.coeffs = Eigen::MatrixXd::Zero(n, k);
    gen.coeffs.topRows(k).setIdentity();

    const int parity = n - k;
    if (parity > 0) {
        // Parity rows are seeded Gaussian, scaled so coded blocks keep the
        // magnitude of the sources. Any square subselection is then
        // invertible almost surely with polynomially bounded conditioning,
        // which is what keeps decode accurate once the coded values have
        // been rounded to doubles. (Structured real-node constructions such
        // as Cauchy grids fail this: random subsets of them reach condition
        // numbers past 1/eps already around k = 50.)
        CounterRng rng(seed, static_cast<std::uint32_t>(n), stream_tag::generator_coeffs,
                       static_cast<std::uint32_t>(k));
        const double scale = 1.0 / std::sqrt(static_cast<double>(k));
        for (int r = 0; r < parity; ++r) {
            for (int c = 0; c < k; ++c) {
                // Box-Muller on the counter stream.
                const double u1 = rng.next_unit();
                const double u2 = rng.next_unit();
                gen.coeffs(k + r, c) =
                    scale * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
            }
        }

        // Spot-check the MDS property on random k-subsets. The threshold is
        // structural: it flags exact rank deficiency, not large-but-finite
        // condition numbers.
        const int checks = std::min(6, parity);
        std::vector<int> rows(n);
        for (int t = 0; t < checks; ++t) {
            for (int i = 0; i < n; ++i) rows[i] = i;
            for (int i = 0; i < k; ++i) {
                const int j = i + static_cast<int>(rng.next_below(n - i));
                std::swap(rows[i], rows[j]);
            }
            MatrixXld sub(k, k);
            for (int i = 0; i < k; ++i) sub.row(i) = gen.coeffs.row(rows[i]).cast<long double>();
            Eigen::FullPivLU<MatrixXld> lu(sub);
            lu.setThreshold(1e-300L);
            if (lu.rank() < k) {
                raise(errc::singular_submatrix, "generator failed MDS spot check");
            }
        }
    }
    return gen;
}

CodedAssignment group_encode(const Eigen::MatrixXd& A, const GroupSystem& system,
                             const Allocation& alloc, std::uint64_t seed) {
    validate_allocation(system, alloc);
    if (alloc.k_total < 1) {
        raise(errc::invalid_allocation, "k_total must be >= 1");
    }
    if (A.rows() % alloc.k_total != 0) {
        raise(errc::indivisible_rows, std::to_string(A.rows()) + " rows not divisible by k = " +
                                          std::to_string(alloc.k_total));
    }

    CodedAssignment out;
    out.alloc = alloc;
    out.block_rows = static_cast<int>(A.rows()) / alloc.k_total;
    out.cols = static_cast<int>(A.cols());

    const int L = system.num_groups();
    out.source_offset.resize(L);
    out.generators.resize(L);
    out.blocks.resize(L);

    int offset = 0;
    for (int i = 0; i < L; ++i) {
        out.source_offset[i] = offset;
        const int k_i = alloc.per_group[i];
        if (k_i == 0) continue; // no blocks for idle groups
        const int n_i = system.group_sizes[i];
        out.generators[i] = mds_generator(n_i, k_i, derive_seed(seed, i));

        Eigen::MatrixXd sources(k_i, static_cast<Eigen::Index>(out.block_rows) * out.cols);
        for (int c = 0; c < k_i; ++c) {
            sources.row(c) = flat(
                A.middleRows(static_cast<Eigen::Index>(offset + c) * out.block_rows, out.block_rows)
                    .eval());
        }
        const Eigen::MatrixXd coded = out.generators[i].coeffs * sources;
        out.blocks[i].reserve(n_i);
        for (int j = 0; j < n_i; ++j) {
            out.blocks[i].push_back(Eigen::Map<const Eigen::MatrixXd>(
                coded.row(j).eval().data(), out.block_rows, out.cols));
        }
        offset += k_i;
    }
    return out;
}

std::vector<Eigen::MatrixXd> decode_from_subset(
    const std::vector<std::pair<int, Eigen::MatrixXd>>& results,
    const GeneratorMatrix& generator) {
    const int n = generator.rows();
    const int k = generator.cols();

    // First k distinct rows in arrival order define the decode subset.
    std::vector<int> chosen;
    std::vector<const Eigen::MatrixXd*> values;
    std::vector<char> seen(n, 0);
    for (const auto& [row, value] : results) {
        if (static_cast<int>(chosen.size()) == k) break;
        if (row < 0 || row >= n) {
            raise(errc::index_out_of_range, "row index " + std::to_string(row));
        }
        if (seen[row]) continue;
        seen[row] = 1;
        chosen.push_back(row);
        values.push_back(&value);
    }
    if (static_cast<int>(chosen.size()) < k) {
        raise(errc::insufficient_results, "need " + std::to_string(k) + " distinct rows, got " +
                                              std::to_string(chosen.size()));
    }
    const Eigen::Index vrows = values[0]->rows();
    const Eigen::Index vcols = values[0]->cols();
    for (const auto* v : values) {
        if (v->rows() != vrows || v->cols() != vcols) {
            raise(errc::shape_mismatch, "received values differ in shape");
        }
    }

    std::vector<Eigen::MatrixXd> sources(k);
    std::vector<char> known(k, 0);
    std::vector<int> parity_rows;
    std::vector<int> parity_slots;
    for (int i = 0; i < k; ++i) {
        if (generator.systematic && chosen[i] < k) {
            sources[chosen[i]] = *values[i]; // verbatim pass-through
            known[chosen[i]] = 1;
        } else {
            parity_rows.push_back(chosen[i]);
            parity_slots.push_back(i);
        }
    }
    std::vector<int> unknown;
    for (int c = 0; c < k; ++c) {
        if (!known[c]) unknown.push_back(c);
    }
    const int p = static_cast<int>(unknown.size());
    if (p == 0) return sources;

    // Eliminate the known sources, then solve the residual parity system in
    // quadruple precision.
    const int width = static_cast<int>(vrows * vcols);
    std::vector<quad> M(static_cast<std::size_t>(p) * p);
    std::vector<quad> rhs(static_cast<std::size_t>(p) * width);
    for (int a = 0; a < p; ++a) {
        const int row = parity_rows[a];
        for (int b = 0; b < p; ++b) {
            M[a * p + b] = static_cast<quad>(generator.coeffs(row, unknown[b]));
        }
        const auto value = flat(*values[parity_slots[a]]);
        for (int c = 0; c < width; ++c) rhs[a * width + c] = static_cast<quad>(value[c]);
        for (int c = 0; c < k; ++c) {
            if (!known[c]) continue;
            const quad coeff = static_cast<quad>(generator.coeffs(row, c));
            const auto src = flat(sources[c]);
            for (int col = 0; col < width; ++col) {
                rhs[a * width + col] -= coeff * static_cast<quad>(src[col]);
            }
        }
    }

    if (!quad_solve(M, rhs, p, width)) {
        raise(errc::singular_submatrix, "received rows do not span the source space");
    }

    for (int b = 0; b < p; ++b) {
        Eigen::MatrixXd value(vrows, vcols);
        for (int c = 0; c < width; ++c) {
            value.data()[c] = static_cast<double>(rhs[b * width + c]);
        }
        sources[unknown[b]] = std::move(value);
    }
    return sources;
}

Eigen::MatrixXd group_decode(
    const std::vector<std::vector<std::pair<int, Eigen::MatrixXd>>>& per_group_results,
    const CodedAssignment& assignment) {
    const int L = static_cast<int>(assignment.blocks.size());
    if (static_cast<int>(per_group_results.size()) != L) {
        raise(errc::shape_mismatch, "results for " + std::to_string(per_group_results.size()) +
                                        " groups, expected " + std::to_string(L));
    }

    Eigen::Index vcols = 1;
    for (const auto& group : per_group_results) {
        if (!group.empty()) {
            vcols = group.front().second.cols();
            break;
        }
    }
    Eigen::MatrixXd output(static_cast<Eigen::Index>(assignment.alloc.k_total) *
                               assignment.block_rows,
                           vcols);

    for (int i = 0; i < L; ++i) {
        const int k_i = assignment.alloc.per_group[i];
        if (k_i == 0) continue;

        int distinct = 0;
        std::vector<char> seen(assignment.generators[i].rows(), 0);
        for (const auto& [row, value] : per_group_results[i]) {
            if (row >= 0 && row < static_cast<int>(seen.size()) && !seen[row]) {
                seen[row] = 1;
                ++distinct;
            }
        }
        if (distinct < k_i) {
            throw Error(errc::group_shortfall,
                        "group " + std::to_string(i) + " returned " + std::to_string(distinct) +
                            " of " + std::to_string(k_i) + " required results",
                        i);
        }

        const auto sources = decode_from_subset(per_group_results[i], assignment.generators[i]);
        for (int c = 0; c < k_i; ++c) {
            output.middleRows(static_cast<Eigen::Index>(assignment.source_offset[i] + c) *
                                  assignment.block_rows,
                              assignment.block_rows) = sources[c];
        }
    }
    return output;
}

} // namespace slab

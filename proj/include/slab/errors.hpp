#pragma once

#include <stdexcept>
#include <string>

namespace slab {

/// Failure categories surfaced by the library. Each value maps 1:1 to a
/// documented error condition of some operation.
enum class errc {
    mismatched_lengths,
    non_positive_size,
    non_positive_rate,
    index_out_of_range,
    allocation_exceeds_group,
    zero_allocation,
    infeasible_k,
    no_convergence,
    infeasible_after_clamp,
    out_of_bracket,
    negative_discriminant,
    invalid_dims,
    indivisible_rows,
    invalid_allocation,
    insufficient_results,
    singular_submatrix,
    group_shortfall,
    shape_mismatch,
    not_decodable_even_complete,
};

const char* errc_name(errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(errc code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    /// For group_shortfall, which group blocked the decode (0-based).
    Error(errc code, std::string message, int group)
        : std::runtime_error(std::move(message)), code_(code), group_(group) {}

    errc code() const noexcept { return code_; }
    int group() const noexcept { return group_; }

private:
    errc code_;
    int group_ = -1;
};

[[noreturn]] inline void raise(errc code, std::string message) {
    throw Error(code, std::move(message));
}

} // namespace slab

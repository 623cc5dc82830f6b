#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "mpdgga/info_theory.hpp"

namespace mpdgga {

/// Candidates whose criterion values differ by no more than this are ties;
/// the smallest index wins. Incremental sums drift by ~1e-15, far below it.
inline constexpr double kCriterionTieTolerance = 1e-12;

/// Relevance/redundancy merit of a feature subset:
///
///   J(S) = sum_fc / sqrt(n_s + sum_ff)
///
/// where sum_ff runs over ordered pairs i != j in S. This equals
/// n_s * mean_fc / sqrt(n_s + n_s (n_s - 1) * mean_ff). The empty subset scores 0.
struct SubsetScore {
    double j_value = 0.0;
    std::size_t n_s = 0;
    double sum_fc = 0.0;
    double sum_ff = 0.0;
};

double criterion_value(std::size_t n_s, double sum_fc, double sum_ff);

SubsetScore score(std::span<const std::uint8_t> mask, const GainRatioMatrix& omega);

/// Running (n_s, sum_fc, sum_ff) for a subset under single-feature edits.
/// add/remove cost O(n_s) each.
class SubsetAccumulator {
public:
    SubsetAccumulator(const GainRatioMatrix& omega, std::span<const std::uint8_t> mask);

    void add(std::size_t f);
    void remove(std::size_t f);
    void flip(std::size_t f) { member_[f] ? remove(f) : add(f); }

    /// Sum of ff(f, j) + ff(j, f) over current members j != f.
    double pair_contribution(std::size_t f) const;

    SubsetScore current() const;
    std::span<const std::uint8_t> mask() const { return member_; }

private:
    const GainRatioMatrix* omega_;
    Mask member_;
    std::size_t n_s_ = 0;
    double sum_fc_ = 0.0;
    double sum_ff_ = 0.0;
};

struct CrossoverChoice {
    std::size_t k_star = 1;  // children take the first k genes from one parent, the rest from the other
    double best_j = 0.0;
};

/// Best single cut point over k in [1, d-1] for the child pair
///   [a(0..k), b(k..d)] and [b(0..k), a(k..d)],
/// maximizing the larger of the two children's criteria. O(d^2) total.
CrossoverChoice sweep_crossover(std::span<const std::uint8_t> parent_a, std::span<const std::uint8_t> parent_b,
                                const GainRatioMatrix& omega);

struct MutationChoice {
    std::size_t r_star = 0;  // zero-based bit index
    double best_j = 0.0;
};

/// Best single-bit flip. A flip that would empty the mask is only returned when d == 1.
MutationChoice sweep_mutation(std::span<const std::uint8_t> mask, const GainRatioMatrix& omega);

}  // namespace mpdgga

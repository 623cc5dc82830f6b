#include "mpdgga/subset_criterion.hpp"

#include <cmath>
#include <stdexcept>

namespace mpdgga {

double criterion_value(std::size_t n_s, double sum_fc, double sum_ff) {
    if (n_s == 0) return 0.0;
    return sum_fc / std::sqrt(static_cast<double>(n_s) + sum_ff);
}

SubsetScore score(std::span<const std::uint8_t> mask, const GainRatioMatrix& omega) {
    if (mask.size() != omega.d) throw std::invalid_argument("score: mask length does not match the matrix");
    const auto members = selected_indices(mask);
    SubsetScore s;
    s.n_s = members.size();
    for (auto i : members) {
        s.sum_fc += omega.fc(i);
        const auto row = omega.ff_row(i);
        for (auto j : members)
            if (j != i) s.sum_ff += row[j];
    }
    s.j_value = criterion_value(s.n_s, s.sum_fc, s.sum_ff);
    return s;
}

SubsetAccumulator::SubsetAccumulator(const GainRatioMatrix& omega, std::span<const std::uint8_t> mask)
    : omega_(&omega), member_(omega.d, 0) {
    if (mask.size() != omega.d) throw std::invalid_argument("accumulator: mask length does not match the matrix");
    for (std::size_t f = 0; f < mask.size(); ++f)
        if (mask[f]) add(f);
}

double SubsetAccumulator::pair_contribution(std::size_t f) const {
    const auto row = omega_->ff_row(f);
    const std::size_t d = omega_->d;
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j)
        if (member_[j] && j != f) s += row[j] + omega_->redundancy[j * d + f];
    return s;
}

void SubsetAccumulator::add(std::size_t f) {
    if (member_[f]) return;
    sum_ff_ += pair_contribution(f);
    sum_fc_ += omega_->fc(f);
    member_[f] = 1;
    ++n_s_;
}

void SubsetAccumulator::remove(std::size_t f) {
    if (!member_[f]) return;
    member_[f] = 0;
    --n_s_;
    sum_ff_ -= pair_contribution(f);
    sum_fc_ -= omega_->fc(f);
    if (n_s_ == 0) {
        // reset drift so the empty set is exact
        sum_fc_ = 0.0;
        sum_ff_ = 0.0;
    }
}

SubsetScore SubsetAccumulator::current() const {
    return {criterion_value(n_s_, sum_fc_, sum_ff_), n_s_, sum_fc_, sum_ff_};
}

CrossoverChoice sweep_crossover(std::span<const std::uint8_t> parent_a, std::span<const std::uint8_t> parent_b,
                                const GainRatioMatrix& omega) {
    const std::size_t d = parent_a.size();
    if (parent_b.size() != d || omega.d != d) throw std::invalid_argument("sweep_crossover: length mismatch");
    if (d < 2) throw std::invalid_argument("sweep_crossover: need at least 2 genes");

    // k = 0: child_a == b, child_b == a. Advancing k moves gene k-1 to the other parent.
    SubsetAccumulator child_a(omega, parent_b);
    SubsetAccumulator child_b(omega, parent_a);
    CrossoverChoice best;
    bool first = true;
    for (std::size_t k = 1; k < d; ++k) {
        const std::size_t g = k - 1;
        if (parent_a[g] != parent_b[g]) {
            child_a.flip(g);
            child_b.flip(g);
        }
        const double j = std::max(child_a.current().j_value, child_b.current().j_value);
        if (first || j > best.best_j + kCriterionTieTolerance) {
            best = {k, j};
            first = false;
        }
    }
    return best;
}

MutationChoice sweep_mutation(std::span<const std::uint8_t> mask, const GainRatioMatrix& omega) {
    const std::size_t d = mask.size();
    if (omega.d != d) throw std::invalid_argument("sweep_mutation: length mismatch");
    if (d == 0) throw std::invalid_argument("sweep_mutation: empty mask");

    SubsetAccumulator acc(omega, mask);
    const SubsetScore base = acc.current();
    MutationChoice best;
    bool found = false;
    for (std::size_t r = 0; r < d; ++r) {
        const double contrib = acc.pair_contribution(r);
        double j;
        if (mask[r]) {
            if (base.n_s == 1 && d > 1) continue;  // would empty the mask
            j = criterion_value(base.n_s - 1, base.sum_fc - omega.fc(r), base.sum_ff - contrib);
        } else {
            j = criterion_value(base.n_s + 1, base.sum_fc + omega.fc(r), base.sum_ff + contrib);
        }
        if (!found || j > best.best_j + kCriterionTieTolerance) {
            best = {r, j};
            found = true;
        }
    }
    return best;
}

}  // namespace mpdgga

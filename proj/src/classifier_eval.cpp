#include "mpdgga/classifier_eval.hpp"

#include <omp.h>

#include <algorithm>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace mpdgga {

FeatureMatrix gather(const Dataset& ds, std::span<const std::size_t> rows, std::span<const std::uint8_t> mask) {
    if (mask.size() != ds.d) throw std::invalid_argument("gather: mask length does not match the dataset");
    const auto cols = selected_indices(mask);
    FeatureMatrix m;
    m.rows = rows.size();
    m.cols = cols.size();
    m.data.resize(m.rows * m.cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto src = ds.row(rows[r]);
        for (std::size_t c = 0; c < cols.size(); ++c) m.data[r * m.cols + c] = src[cols[c]];
    }
    return m;
}

namespace {

std::int32_t vote(const FeatureMatrix& train, std::span<const std::int32_t> train_y, std::span<const double> q,
                  std::size_t k, std::vector<std::pair<double, std::size_t>>& scratch,
                  std::vector<std::size_t>& counts) {
    const std::size_t cols = train.cols;
    for (std::size_t t = 0; t < train.rows; ++t) {
        const double* x = train.data.data() + t * cols;
        double s = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
            const double diff = x[c] - q[c];
            s += diff * diff;
        }
        scratch[t] = {s, t};
    }
    // lexicographic (distance, row) order gives the documented distance tie-break
    std::partial_sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k), scratch.end());
    std::fill(counts.begin(), counts.end(), 0);
    std::size_t top = 0;
    for (std::size_t i = 0; i < k; ++i) top = std::max(top, ++counts[static_cast<std::size_t>(train_y[scratch[i].second])]);
    for (std::size_t i = 0; i < k; ++i) {
        const auto label = train_y[scratch[i].second];
        if (counts[static_cast<std::size_t>(label)] == top) return label;
    }
    return train_y[scratch[0].second];
}

}  // namespace

std::vector<std::int32_t> knn_predict(const FeatureMatrix& train, std::span<const std::int32_t> train_y,
                                      const FeatureMatrix& query, int k, Execution exec, int threads) {
    if (train.rows == 0) throw std::invalid_argument("knn_predict: empty training set");
    if (train.cols == 0) throw std::invalid_argument("knn_predict: no features selected");
    if (k < 1) throw std::invalid_argument("knn_predict: k must be >= 1");
    if (train_y.size() != train.rows) throw std::invalid_argument("knn_predict: label count mismatch");
    if (query.cols != train.cols) throw std::invalid_argument("knn_predict: column mismatch");

    const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), train.rows);
    const std::size_t n_classes = static_cast<std::size_t>(*std::max_element(train_y.begin(), train_y.end())) + 1;
    std::vector<std::int32_t> out(query.rows);
    const int nthreads = exec == Execution::parallel && !omp_in_parallel() ? resolve_threads(threads) : 1;

#pragma omp parallel num_threads(nthreads) if (nthreads > 1)
    {
        std::vector<std::pair<double, std::size_t>> scratch(train.rows);
        std::vector<std::size_t> counts(n_classes);
#pragma omp for schedule(static)
        for (std::size_t qi = 0; qi < query.rows; ++qi)
            out[qi] = vote(train, train_y, query.row(qi), kk, scratch, counts);
    }
    return out;
}

std::vector<std::int32_t> knn_predict(const Dataset& ds, std::span<const std::size_t> train_rows,
                                      std::span<const std::size_t> query_rows, std::span<const std::uint8_t> mask,
                                      int k, Execution exec, int threads) {
    if (count_selected(mask) == 0) throw std::invalid_argument("knn_predict: empty mask");
    const FeatureMatrix train = gather(ds, train_rows, mask);
    const FeatureMatrix query = gather(ds, query_rows, mask);
    std::vector<std::int32_t> y(train_rows.size());
    for (std::size_t i = 0; i < train_rows.size(); ++i) y[i] = ds.y[train_rows[i]];
    return knn_predict(train, y, query, k, exec, threads);
}

MetricBundle evaluate_metrics(std::span<const std::int32_t> y_true, std::span<const std::int32_t> y_pred) {
    if (y_true.size() != y_pred.size()) throw std::invalid_argument("evaluate_metrics: length mismatch");
    if (y_true.empty()) throw std::invalid_argument("evaluate_metrics: empty input");
    std::int32_t max_label = 0;
    for (auto v : y_true) max_label = std::max(max_label, v);
    for (auto v : y_pred) max_label = std::max(max_label, v);

    MetricBundle m;
    m.per_class.resize(static_cast<std::size_t>(max_label) + 1);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        auto& t = m.per_class[static_cast<std::size_t>(y_true[i])];
        ++t.support;
        if (y_true[i] == y_pred[i]) {
            ++correct;
            ++t.tp;
        } else {
            ++t.fn;
            ++m.per_class[static_cast<std::size_t>(y_pred[i])].fp;
        }
    }
    const double n = static_cast<double>(y_true.size());
    m.accuracy = static_cast<double>(correct) / n;
    for (auto& c : m.per_class) {
        c.precision = c.tp + c.fp ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
        c.recall = c.tp + c.fn ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
        c.f1 = c.precision + c.recall > 0 ? 2.0 * c.precision * c.recall / (c.precision + c.recall) : 0.0;
        const double w = static_cast<double>(c.support) / n;
        m.precision += w * c.precision;
        m.recall += w * c.recall;
        m.f1 += w * c.f1;
    }
    return m;
}

double fitness_value(double acc, std::size_t n_selected, std::size_t n_features, double alpha) {
    return (1.0 - alpha) * acc + alpha * (1.0 - static_cast<double>(n_selected) / static_cast<double>(n_features));
}

FitnessEvaluator::FitnessEvaluator(const Dataset& ds, FitnessConfig config) : ds_(&ds), config_(config) {
    if (ds.train_rows.empty()) throw DataError("fitness: empty training partition");
    if (ds.val_rows.empty()) throw DataError("fitness: empty validation partition");
}

FitnessRecord FitnessEvaluator::evaluate_uncached(std::span<const std::uint8_t> mask) const {
    FitnessRecord rec;
    rec.mask_key = mask_key(mask);
    rec.n_selected = count_selected(mask);
    if (rec.n_selected == 0) return rec;  // sentinel: fitness 0, acc 0

    ++classifier_calls_;
    const auto pred = knn_predict(*ds_, ds_->train_rows, ds_->val_rows, mask, config_.k,
                                  config_.threads > 1 ? Execution::parallel : Execution::serial, config_.threads);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == ds_->y[ds_->val_rows[i]];
    rec.acc = static_cast<double>(correct) / static_cast<double>(pred.size());
    rec.fitness = fitness_value(rec.acc, rec.n_selected, ds_->d, config_.alpha);
    return rec;
}

FitnessRecord FitnessEvaluator::evaluate(std::span<const std::uint8_t> mask) {
    const std::string key = mask_key(mask);
    {
        std::shared_lock lock(mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) {
            ++cache_hits_;
            return it->second;
        }
    }
    FitnessRecord rec = evaluate_uncached(mask);
    std::unique_lock lock(mutex_);
    cache_.insert_or_assign(key, rec);
    return rec;
}

MetricBundle evaluate_on_test(const Dataset& ds, std::span<const std::uint8_t> mask, int k, bool include_validation) {
    std::vector<std::size_t> train(ds.train_rows);
    if (include_validation) {
        train.insert(train.end(), ds.val_rows.begin(), ds.val_rows.end());
        std::sort(train.begin(), train.end());
    }
    if (ds.test_rows.empty()) throw DataError("empty test partition");
    const auto pred = knn_predict(ds, train, ds.test_rows, mask, k);
    std::vector<std::int32_t> truth(ds.test_rows.size());
    for (std::size_t i = 0; i < truth.size(); ++i) truth[i] = ds.y[ds.test_rows[i]];
    return evaluate_metrics(truth, pred);
}

}  // namespace mpdgga

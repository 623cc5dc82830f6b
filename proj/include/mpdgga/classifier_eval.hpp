#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mpdgga/data_ingest.hpp"
#include "mpdgga/info_theory.hpp"

namespace mpdgga {

/// Dense row-major matrix of the selected feature columns.
struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
};

/// Continuous view restricted to `rows` and the set bits of `mask`.
FeatureMatrix gather(const Dataset& ds, std::span<const std::size_t> rows, std::span<const std::uint8_t> mask);

/// k-nearest-neighbour majority vote with squared Euclidean distance.
/// Distance ties go to the lower training row; vote ties go to the tied class
/// whose member is nearest. The parallel path splits queries across threads and
/// produces the same labels as the serial path.
std::vector<std::int32_t> knn_predict(const FeatureMatrix& train, std::span<const std::int32_t> train_y,
                                      const FeatureMatrix& query, int k, Execution exec = Execution::serial,
                                      int threads = 0);

std::vector<std::int32_t> knn_predict(const Dataset& ds, std::span<const std::size_t> train_rows,
                                      std::span<const std::size_t> query_rows, std::span<const std::uint8_t> mask,
                                      int k, Execution exec = Execution::serial, int threads = 0);

struct ClassCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t support = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Accuracy plus support-weighted precision, recall and F1.
struct MetricBundle {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::vector<ClassCounts> per_class;
};

MetricBundle evaluate_metrics(std::span<const std::int32_t> y_true, std::span<const std::int32_t> y_pred);

/// (1 - alpha) * acc + alpha * (1 - n_selected / n_features)
double fitness_value(double acc, std::size_t n_selected, std::size_t n_features, double alpha);

struct FitnessConfig {
    double alpha = 0.01;
    int k = 5;
    int threads = 1;  // query-level parallelism inside one evaluation
};

struct FitnessRecord {
    double fitness = 0.0;
    double acc = 0.0;
    std::size_t n_selected = 0;
    std::string mask_key;

    bool operator==(const FitnessRecord&) const = default;
};

/// Wrapper fitness: KNN trained on the training partition, accuracy on the
/// validation partition. Results are memoized by mask; lookups and inserts may
/// come from several threads at once.
class FitnessEvaluator {
public:
    FitnessEvaluator(const Dataset& ds, FitnessConfig config);

    FitnessRecord evaluate(std::span<const std::uint8_t> mask);
    FitnessRecord evaluate_uncached(std::span<const std::uint8_t> mask) const;

    std::size_t classifier_calls() const { return classifier_calls_.load(); }
    std::size_t cache_hits() const { return cache_hits_.load(); }
    const FitnessConfig& config() const { return config_; }
    const Dataset& dataset() const { return *ds_; }

private:
    const Dataset* ds_;
    FitnessConfig config_;
    mutable std::shared_mutex mutex_;
    std::unordered_map<std::string, FitnessRecord> cache_;
    mutable std::atomic<std::size_t> classifier_calls_{0};
    std::atomic<std::size_t> cache_hits_{0};
};

/// Final report for a mask: retrain on train (optionally train + validation) and score the test partition.
MetricBundle evaluate_on_test(const Dataset& ds, std::span<const std::uint8_t> mask, int k,
                              bool include_validation = false);

}  // namespace mpdgga

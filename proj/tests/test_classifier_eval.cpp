#include <doctest.h>

#include <random>

#include "mpdgga/classifier_eval.hpp"
#include "test_support.hpp"

using namespace mpdgga;

namespace {

FeatureMatrix matrix(const std::vector<std::vector<double>>& rows) {
    FeatureMatrix m;
    m.rows = rows.size();
    m.cols = rows.empty() ? 0 : rows[0].size();
    for (const auto& r : rows) m.data.insert(m.data.end(), r.begin(), r.end());
    return m;
}

const std::vector<std::vector<double>> kPlanar{{0, 0}, {1, 0}, {0, 1}, {5, 5}, {6, 5}, {5, 6}};
const std::vector<std::int32_t> kPlanarY{0, 0, 0, 1, 1, 1};

}  // namespace

TEST_CASE("knn basic cases") {
    const auto train = matrix(kPlanar);
    const auto q = matrix({{6, 5}});
    CHECK(knn_predict(train, kPlanarY, q, 1) == std::vector<std::int32_t>{1});
    const std::vector<std::int32_t> same(6, 1);
    CHECK(knn_predict(train, same, matrix({{0, 0}, {9, 9}}), 3) == std::vector<std::int32_t>{1, 1});
}

TEST_CASE("knn planar table with k=5") {
    // (2.5,2.5): rows 1,2 at sqrt(8.5), rows 0,3 at sqrt(12.5), rows 4,5 tied at sqrt(18.5) -> row 4 taken
    // (3,3): row 3 nearest, then rows 1,2,4,5 tied at sqrt(13)
    const auto q = matrix({{0.5, 0.5}, {5.5, 5.5}, {3, 3}, {2.5, 2.5}});
    CHECK(knn_predict(matrix(kPlanar), kPlanarY, q, 5) == std::vector<std::int32_t>{0, 1, 1, 0});
}

TEST_CASE("knn vote tie goes to the nearest tied class") {
    // k=4 at (3,3): rows 3,1,2,4 -> two votes each, row 3 (class 1) is nearest
    CHECK(knn_predict(matrix(kPlanar), kPlanarY, matrix({{3, 3}}), 4) == std::vector<std::int32_t>{1});
}

TEST_CASE("knn agrees with the oracle and across execution modes") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t n = 5 + rng() % 40, cols = 1 + rng() % 5, nq = 1 + rng() % 20;
        const int k = 1 + static_cast<int>(rng() % 7);
        std::vector<std::vector<double>> tr(n, std::vector<double>(cols)), qs(nq, std::vector<double>(cols));
        std::vector<std::int32_t> y(n);
        std::vector<int> yi(n);
        // coarse grid values make distance ties common
        for (auto& r : tr)
            for (auto& x : r) x = std::floor(u(rng) * 4) / 4;
        for (auto& r : qs)
            for (auto& x : r) x = std::floor(u(rng) * 4) / 4;
        for (std::size_t i = 0; i < n; ++i) yi[i] = y[i] = static_cast<std::int32_t>(rng() % 3);
        const auto serial = knn_predict(matrix(tr), y, matrix(qs), k);
        const auto parallel = knn_predict(matrix(tr), y, matrix(qs), k, Execution::parallel, 3);
        CHECK(serial == parallel);
        for (std::size_t i = 0; i < nq; ++i)
            CHECK(serial[i] == oracle::knn_label(tr, yi, qs[i], static_cast<std::size_t>(k)));
    }
}

TEST_CASE("knn rejects degenerate input") {
    const auto ds = generate_synthetic({});
    const Mask empty(ds.d, 0);
    CHECK_THROWS_AS(knn_predict(ds, ds.train_rows, ds.val_rows, empty, 5), std::invalid_argument);
    CHECK_THROWS_AS(knn_predict(matrix(kPlanar), kPlanarY, matrix({{1.0}}), 3), std::invalid_argument);
}

TEST_CASE("metrics examples") {
    const std::vector<std::int32_t> t{1, 1, 0, 0};
    const auto perfect = evaluate_metrics(t, t);
    CHECK(perfect.accuracy == 1.0);
    CHECK(perfect.precision == 1.0);
    CHECK(perfect.recall == 1.0);
    CHECK(perfect.f1 == 1.0);

    const auto m = evaluate_metrics(t, std::vector<std::int32_t>{1, 0, 0, 0});
    CHECK(m.accuracy == doctest::Approx(0.75));
    CHECK(m.per_class[1].precision == doctest::Approx(1.0));
    CHECK(m.per_class[1].recall == doctest::Approx(0.5));
    CHECK(m.per_class[1].f1 == doctest::Approx(2.0 / 3.0));

    const auto one = evaluate_metrics(t, std::vector<std::int32_t>{0, 0, 0, 0});
    CHECK(one.accuracy == doctest::Approx(0.5));
    CHECK(one.f1 == doctest::Approx(1.0 / 3.0));
    CHECK(one.per_class[1].precision == 0.0);
}

TEST_CASE("metrics agree with the confusion-matrix oracle") {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng() % 50;
        const int c = 2 + static_cast<int>(rng() % 4);
        std::vector<std::int32_t> t(n), p(n);
        std::vector<int> ti(n), pi(n);
        for (std::size_t i = 0; i < n; ++i) {
            ti[i] = t[i] = static_cast<int>(rng() % c);
            pi[i] = p[i] = static_cast<int>(rng() % c);
        }
        const auto got = evaluate_metrics(t, p);
        const auto want = oracle::metrics(ti, pi);
        CHECK(got.accuracy == doctest::Approx(want.accuracy));
        CHECK(got.precision == doctest::Approx(want.precision));
        CHECK(got.recall == doctest::Approx(want.recall));
        CHECK(got.f1 == doctest::Approx(want.f1));
    }
}

TEST_CASE("fitness arithmetic") {
    CHECK(std::abs(fitness_value(0.994, 8, 41, 0.01) - 0.99211) < 1e-5);
    CHECK(fitness_value(0.73, 41, 41, 0.01) == doctest::Approx(0.99 * 0.73));
    CHECK(fitness_value(1.0, 1, 100, 0.01) == doctest::Approx(0.9999));
    CHECK(fitness_value(0.8, 3, 10, 0.0) == doctest::Approx(0.8));
}

TEST_CASE("fitness evaluator caches and scores on validation") {
    const auto ds = generate_synthetic({});
    FitnessEvaluator ev(ds, {});
    const Mask m = mask_from_string("111100000000");
    const auto a = ev.evaluate(m);
    const auto b = ev.evaluate(m);
    CHECK(a == b);
    CHECK(ev.classifier_calls() == 1);
    CHECK(ev.cache_hits() == 1);

    const auto pred = knn_predict(ds, ds.train_rows, ds.val_rows, m, 5);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == ds.y[ds.val_rows[i]];
    const double acc = static_cast<double>(correct) / static_cast<double>(pred.size());
    CHECK(a.acc == doctest::Approx(acc));
    CHECK(a.fitness == doctest::Approx(0.99 * acc + 0.01 * (1.0 - 4.0 / 12.0)));
    CHECK(a.n_selected == 4);

    const auto empty = ev.evaluate(Mask(ds.d, 0));
    CHECK(empty.fitness == 0.0);
    CHECK(empty.acc == 0.0);

    FitnessEvaluator threaded(ds, {0.01, 5, 3});
    CHECK(threaded.evaluate(m) == a);
}

TEST_CASE("test-partition report") {
    const auto ds = generate_synthetic({});
    const Mask m = mask_from_string("111100000000");
    const auto r = evaluate_on_test(ds, m, 5);
    CHECK(r.accuracy >= 0.0);
    CHECK(r.accuracy <= 1.0);
    const auto pred = knn_predict(ds, ds.train_rows, ds.test_rows, m, 5);
    std::vector<std::int32_t> truth;
    for (auto row : ds.test_rows) truth.push_back(ds.y[row]);
    CHECK(r.f1 == doctest::Approx(evaluate_metrics(truth, pred).f1));
}

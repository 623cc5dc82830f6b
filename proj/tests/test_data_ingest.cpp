#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mpdgga/data_ingest.hpp"
#include "test_support.hpp"

using namespace mpdgga;

namespace {

RawTable table_from(const std::string& text, const std::string& label = "class", bool header = true) {
    std::istringstream in(text);
    return parse_csv(in, label, header);
}

}  // namespace

TEST_CASE("parse_csv reads a small table with a header") {
    const auto t = table_from("a,b,class\n1,2,x\n3,4,y\n5,6,x\n7,8,y\n");
    CHECK(t.n_rows == 4);
    CHECK(t.n_features() == 2);
    CHECK(t.n_classes() == 2);
    CHECK(t.columns[0].name == "a");
    CHECK(t.columns[1].values[3] == 8.0);
    CHECK(t.labels[1] == "y");
}

TEST_CASE("parse_csv without header names columns by position") {
    const auto t = table_from("1,2,p\n3,4,q\n", "2", false);
    CHECK(t.n_features() == 2);
    CHECK(t.columns[0].name == "0");
}

TEST_CASE("parse_csv rejects malformed input") {
    CHECK_THROWS_AS(table_from("a,b,class\n1,2,x\n3,y\n"), DataError);
    CHECK_THROWS_AS(table_from("a,b,class\n"), DataError);
    CHECK_THROWS_AS(table_from("a,b,c\n1,2,3\n"), DataError);
}

TEST_CASE("quoted fields, categorical and missing cells") {
    const auto t = table_from("name,v,class\n\"x, y\",1,a\nz,?,b\n\"x, y\",3,a\n");
    CHECK_FALSE(t.columns[0].numeric);
    CHECK(t.columns[0].text[0] == "x, y");
    CHECK(t.columns[1].numeric);
    CHECK(std::isnan(t.columns[1].values[1]));
}

TEST_CASE("Sonar file has the documented shape") {
    const auto t = load_csv(test_support::data_dir() / "sonar.csv", "Class", true);
    CHECK(t.n_rows == 208);
    CHECK(t.n_features() == 60);
    CHECK(t.n_classes() == 2);
}

TEST_CASE("min-max and equal-width conventions") {
    CHECK(min_max_scale(5, 0, 10) == doctest::Approx(0.5));
    CHECK(min_max_scale(-1, 0, 10) == 0.0);
    CHECK(min_max_scale(7, 7, 7) == 0.0);
    CHECK(equal_width_bin(0, 0, 10, 2) == 0);
    CHECK(equal_width_bin(5, 0, 10, 2) == 1);
    CHECK(equal_width_bin(10, 0, 10, 2) == 1);
    CHECK(equal_width_bin(7, 7, 7, 4) == 0);
}

TEST_CASE("prepare example column over the whole table") {
    const auto t = table_from("v,c,class\n0,7,a\n5,7,b\n10,7,a\n");
    const auto ds = prepare(t, 2, 1, PrepareOptions{false});
    CHECK(ds.cont(0, 0) == 0.0);
    CHECK(ds.cont(1, 0) == doctest::Approx(0.5));
    CHECK(ds.cont(2, 0) == 1.0);
    CHECK(ds.disc(0, 0) == 0);
    CHECK(ds.disc(1, 0) == 1);
    CHECK(ds.disc(2, 0) == 1);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(ds.cont(i, 1) == 0.0);
        CHECK(ds.disc(i, 1) == 0);
    }
}

TEST_CASE("stratified 8:1:1 split") {
    std::ostringstream csv;
    csv << "v,class\n";
    for (int i = 0; i < 100; ++i) csv << i << ',' << (i % 2 ? "b" : "a") << '\n';
    const auto ds = prepare(table_from(csv.str()), 10, 7);
    CHECK(ds.train_rows.size() == 80);
    CHECK(ds.val_rows.size() == 10);
    CHECK(ds.test_rows.size() == 10);
    for (std::int32_t c = 0; c < 2; ++c) {
        auto count = [&](const std::vector<std::size_t>& rows) {
            return std::count_if(rows.begin(), rows.end(), [&](auto r) { return ds.y[r] == c; });
        };
        CHECK(count(ds.train_rows) == 40);
        CHECK(count(ds.val_rows) == 5);
        CHECK(count(ds.test_rows) == 5);
    }
    const auto again = prepare(table_from(csv.str()), 10, 7);
    CHECK(again.val_rows == ds.val_rows);
    const auto other = prepare(table_from(csv.str()), 10, 8);
    CHECK(other.val_rows != ds.val_rows);
}

TEST_CASE("training-only fit keeps normalized values clamped") {
    const auto ds = generate_synthetic({});
    for (double v : ds.x_cont) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    for (std::size_t j = 0; j < ds.d; ++j)
        for (std::size_t i = 0; i < ds.n; ++i) CHECK(ds.disc(i, j) < ds.bins[j]);
}

TEST_CASE("missing cells are imputed and reported") {
    const auto t = table_from("v,w,class\n1,a,x\n?,b,y\n3,,x\n5,a,y\n");
    const auto ds = prepare(t, 2, 1, PrepareOptions{false});
    CHECK(ds.report.missing_per_column == std::vector<std::size_t>{1, 1});
    for (double v : ds.x_cont) CHECK(std::isfinite(v));
}

TEST_CASE("prepare validation") {
    CHECK_THROWS_AS(prepare(table_from("v,class\n1,a\n2,a\n"), 10, 1), DataError);
    CHECK_THROWS_AS(prepare(table_from("v,class\n1,a\n2,b\n"), 1, 1), ConfigError);
}

TEST_CASE("synthetic generator") {
    SyntheticSpec bad;
    bad.n_informative = 0;
    bad.n_noise = 12;
    CHECK_THROWS_AS(generate_synthetic(bad), ConfigError);

    const auto a = generate_synthetic({});
    const auto b = generate_synthetic({});
    CHECK(a.x_cont == b.x_cont);
    CHECK(a.x_disc == b.x_disc);
    CHECK(a.y == b.y);
    CHECK(a.d == 12);
    CHECK(a.n == 200);
    CHECK(a.feature_names.front() == "inf0");
    CHECK(a.feature_names.back() == "noise5");
}

TEST_CASE("stratified subsample keeps class proportions") {
    std::ostringstream csv;
    csv << "v,class\n";
    for (int i = 0; i < 1000; ++i) csv << i << ',' << (i % 4 == 0 ? "rare" : "common") << '\n';
    const auto t = table_from(csv.str());
    const auto s = stratified_subsample(t, 100, 3);
    CHECK(s.n_rows == 100);
    CHECK(std::count(s.labels.begin(), s.labels.end(), "rare") == 25);
    CHECK(stratified_subsample(t, 100, 3).columns[0].values == s.columns[0].values);
    CHECK(stratified_subsample(t, 0, 3).n_rows == 1000);
}

TEST_CASE("manifest paths resolve against the manifest directory") {
    const auto m = load_manifest(test_support::data_dir() / "manifests" / "sonar.json");
    CHECK(m.label_column == "Class");
    CHECK(std::filesystem::exists(m.path));
    CHECK(file_digest(m.path).size() == 16);
}

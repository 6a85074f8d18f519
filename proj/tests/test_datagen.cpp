#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "datagen.hpp"
#include "error.hpp"

using namespace tpot;

TEST_CASE("hwe frequencies sum to one")
{
    for (double p : { 0.05, 0.2, 0.5 }) {
        const auto f = hwe_frequencies(p);
        CHECK(f[0] + f[1] + f[2] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(f[2] == doctest::Approx(p * p));
    }
}

TEST_CASE("heritability of reference tables")
{
    PenetranceTable flat;
    flat.maf = 0.3;
    for (auto& row : flat.cells) {
        row = { 0.4, 0.4, 0.4 };
    }
    CHECK(heritability_of(flat) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(marginal_residual(flat) < 1e-12);

    // Fully penetrant parity table at maf 0.5 has every genotype determined.
    PenetranceTable xorish;
    xorish.maf = 0.5;
    xorish.cells = { { { { 1, 0, 1 } }, { { 0, 1, 0 } }, { { 1, 0, 1 } } } };
    CHECK(prevalence_of(xorish) == doctest::Approx(0.5));
    CHECK(heritability_of(xorish) == doctest::Approx(1.0));
    CHECK(marginal_residual(xorish) < 1e-12);

    PenetranceTable never;
    never.cells = {};
    CHECK_THROWS_AS(heritability_of(never), Error);
    try {
        heritability_of(never);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::UndefinedHeritability);
    }
}

TEST_CASE("generated tables are purely epistatic with target heritability")
{
    for (double h2 : { 0.1, 0.2, 0.4 }) {
        for (double maf : { 0.2, 0.4 }) {
            Rng rng = make_rng(17);
            const auto t = generate_pure_epistatic_table(h2, maf, 0.01, rng);
            CHECK(marginal_residual(t) < 1e-6);
            CHECK(std::abs(heritability_of(t) - h2) <= 0.01);
            for (const auto& row : t.cells) {
                for (double c : row) {
                    CHECK(c >= 0.0);
                    CHECK(c <= 1.0);
                }
            }
        }
    }
}

TEST_CASE("infeasible heritability reports generation failure")
{
    Rng rng = make_rng(3);
    try {
        generate_pure_epistatic_table(0.999, 0.2, 0.0005, rng, 2000);
        FAIL("expected failure");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::GenerationFailed);
    }
}

TEST_CASE("simulated dataset shape, balance and column map")
{
    EpistasisSpec spec;
    spec.sample_size = 200;
    Rng rng = make_rng(5);
    const auto d = simulate_epistatic_dataset(spec, rng);
    CHECK(d.data.rows() == 200);
    CHECK(d.data.cols() == 100);
    CHECK(d.predictive_columns.size() == 8);
    CHECK(d.noise_mafs.size() == 92);
    int cases = 0;
    for (auto l : d.data.labels()) {
        cases += l;
    }
    CHECK(cases == 100);
    for (double v : d.data.values()) {
        CHECK((v == 0.0 || v == 1.0 || v == 2.0));
    }
    std::vector<std::size_t> cols = d.predictive_columns;
    std::sort(cols.begin(), cols.end());
    CHECK(std::unique(cols.begin(), cols.end()) == cols.end());

    Rng again = make_rng(5);
    CHECK(simulate_epistatic_dataset(spec, again).data == d.data);

    const auto meta = epistasis_metadata_json(spec, d, 5);
    CHECK(meta.find("predictive_columns") != std::string::npos);
}

TEST_CASE("deterministic tables give a perfect lookup oracle")
{
    // Penetrance 0/1 parity tables: labels are a function of the predictive genotypes.
    EpistasisSpec spec;
    spec.n_models = 1;
    spec.predictive_snps = 2;
    spec.noise_snps = 3;
    spec.sample_size = 300;
    spec.maf = 0.5;
    PenetranceTable t;
    t.maf = 0.5;
    t.cells = { { { { 1, 0, 1 } }, { { 0, 1, 0 } }, { { 1, 0, 1 } } } };
    Rng rng = make_rng(9);
    const auto d = simulate_epistatic_dataset(spec, { t }, rng);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < d.data.rows(); ++i) {
        const int a = static_cast<int>(d.data.at(i, d.predictive_columns[0]));
        const int b = static_cast<int>(d.data.at(i, d.predictive_columns[1]));
        hits += static_cast<int>(t.cells[a][b]) == d.data.labels()[i];
    }
    CHECK(hits == d.data.rows());
}

TEST_CASE("spec validation")
{
    EpistasisSpec spec;
    spec.predictive_snps = 7;
    CHECK_THROWS_AS(check_spec(spec), Error);
    spec = {};
    spec.noise_snps = -1;
    CHECK_THROWS_AS(check_spec(spec), Error);
}

TEST_CASE("hill valley rows follow the rule oracle without noise")
{
    HillValleySpec spec;
    Rng rng = make_rng(11);
    const auto ds = generate_hill_valley(spec, rng);
    CHECK(ds.rows() == 606);
    CHECK(ds.cols() == 100);
    CHECK(ds.feature_names().front() == "X1");
    CHECK(ds.feature_names().back() == "X100");
    int ones = 0;
    std::size_t hits = 0;
    std::vector<double> row(ds.cols());
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        for (std::size_t j = 0; j < ds.cols(); ++j) {
            row[j] = ds.at(i, j);
            CHECK(row[j] > 0.0);
        }
        ones += ds.labels()[i];
        hits += hill_valley_rule(row) == ds.labels()[i];
    }
    CHECK(ones == 303);
    CHECK(hits == ds.rows());
}

TEST_CASE("csv writer emits header plus one line per row")
{
    HillValleySpec spec;
    spec.n_samples = 20;
    spec.series_length = 10;
    spec.noise_std = 2.0;
    Rng rng = make_rng(1);
    const auto ds = generate_hill_valley(spec, rng);
    const auto path = (std::filesystem::temp_directory_path() / "tpot_datagen_test.csv").string();
    write_csv(ds, path);
    std::ifstream f(path);
    std::string line;
    int lines = 0;
    std::getline(f, line);
    CHECK(line.rfind("X1,X2,", 0) == 0);
    CHECK(line.substr(line.size() - 5) == "class");
    while (std::getline(f, line)) {
        ++lines;
    }
    CHECK(lines == 20);
    std::filesystem::remove(path);

    CHECK_THROWS_AS(write_csv(ds, "/nonexistent-dir/x.csv"), Error);
}

TEST_CASE("single predictive SNPs carry no marginal signal")
{
    EpistasisSpec spec;
    spec.sample_size = 50000;
    spec.noise_snps = 0;
    Rng rng = make_rng(21);
    const auto d = simulate_epistatic_dataset(spec, rng);
    for (std::size_t col : d.predictive_columns) {
        double counts[2][3] = {};
        for (std::size_t i = 0; i < d.data.rows(); ++i) {
            counts[d.data.labels()[i]][static_cast<int>(d.data.at(i, col))] += 1;
        }
        double chi2 = 0.0;
        const double n = static_cast<double>(d.data.rows());
        for (int c = 0; c < 2; ++c) {
            const double row = counts[c][0] + counts[c][1] + counts[c][2];
            for (int g = 0; g < 3; ++g) {
                const double expected = row * (counts[0][g] + counts[1][g]) / n;
                chi2 += (counts[c][g] - expected) * (counts[c][g] - expected) / expected;
            }
        }
        // df = 2; p < 1e-6 is about 27.6.
        CHECK(chi2 < 27.6);
    }
}

TEST_CASE("hill valley baselines differ between rows")
{
    HillValleySpec spec;
    spec.n_samples = 50;
    Rng rng = make_rng(4);
    const auto ds = generate_hill_valley(spec, rng);
    double lo = 1e300;
    double hi = 0.0;
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        double mean = 0.0;
        for (std::size_t j = 0; j < ds.cols(); ++j) {
            mean += ds.at(i, j);
        }
        mean /= static_cast<double>(ds.cols());
        lo = std::min(lo, mean);
        hi = std::max(hi, mean);
    }
    CHECK(hi / lo > 10.0);

    Rng again = make_rng(4);
    CHECK(generate_hill_valley(spec, again) == ds);
}

TEST_CASE("epistatic csv has one line per row plus header")
{
    EpistasisSpec spec;
    spec.sample_size = 1600;
    Rng rng = make_rng(2);
    const auto d = simulate_epistatic_dataset(spec, rng);
    const auto path = (std::filesystem::temp_directory_path() / "tpot_epistasis_test.csv").string();
    write_csv(d.data, path);
    std::ifstream f(path);
    std::string line;
    int lines = 0;
    while (std::getline(f, line)) {
        ++lines;
    }
    CHECK(lines == 1601);
    std::filesystem::remove(path);
}

TEST_CASE("csv writer refuses datasets without features")
{
    const Dataset empty({}, {}, { 0, 1 }, 2);
    CHECK_THROWS_AS(write_csv(empty, "/tmp/never.csv"), Error);
}

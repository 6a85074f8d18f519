#include "datagen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "error.hpp"

namespace tpot {

GenotypeFrequencies hwe_frequencies(double maf)
{
    const double q = 1.0 - maf;
    return { q * q, 2.0 * maf * q, maf * maf };
}

double prevalence_of(const PenetranceTable& t)
{
    const auto p = hwe_frequencies(t.maf);
    double k = 0.0;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            k += p[i] * p[j] * t.cells[i][j];
        }
    }
    return k;
}

double heritability_of(const PenetranceTable& t)
{
    const auto p = hwe_frequencies(t.maf);
    const double k = prevalence_of(t);
    require(k > 0.0 && k < 1.0, ErrorKind::UndefinedHeritability, "prevalence must lie strictly between 0 and 1");
    double var = 0.0;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            var += p[i] * p[j] * (t.cells[i][j] - k) * (t.cells[i][j] - k);
        }
    }
    return var / (k * (1.0 - k));
}

double marginal_residual(const PenetranceTable& t)
{
    const auto p = hwe_frequencies(t.maf);
    const double k = prevalence_of(t);
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) {
        double row = 0.0;
        double col = 0.0;
        for (int j = 0; j < 3; ++j) {
            row += p[j] * t.cells[i][j];
            col += p[j] * t.cells[j][i];
        }
        worst = std::max({ worst, std::abs(row - k), std::abs(col - k) });
    }
    return worst;
}

PenetranceTable generate_pure_epistatic_table(double target_h2, double maf, double tolerance, Rng& rng, int attempts)
{
    require(target_h2 > 0.0 && target_h2 < 1.0, ErrorKind::Contract, "target heritability must lie in (0, 1)");
    require(maf > 0.0 && maf <= 0.5, ErrorKind::Contract, "minor allele frequency must lie in (0, 0.5]");
    const auto p = hwe_frequencies(maf);
    double best_excess = std::numeric_limits<double>::infinity();
    for (int attempt = 0; attempt < attempts; ++attempt) {
        double m[3][3];
        for (auto& row : m) {
            for (auto& v : row) {
                v = uniform01(rng);
            }
        }
        // Weighted double centering removes both marginal effects.
        double r[3] = {};
        double c[3] = {};
        double g = 0.0;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                r[i] += p[j] * m[i][j];
                c[j] += p[i] * m[i][j];
                g += p[i] * p[j] * m[i][j];
            }
        }
        double d[3][3];
        double var = 0.0;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                d[i][j] = m[i][j] - r[i] - c[j] + g;
                var += p[i] * p[j] * d[i][j] * d[i][j];
            }
        }
        if (!(var > 1e-12)) {
            continue;
        }
        const double k = 0.02 + 0.96 * uniform01(rng);
        const double scale = std::sqrt(target_h2 * k * (1.0 - k) / var);
        PenetranceTable t;
        t.maf = maf;
        double excess = 0.0;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                t.cells[i][j] = k + scale * d[i][j];
                excess = std::max({ excess, -t.cells[i][j], t.cells[i][j] - 1.0 });
            }
        }
        best_excess = std::min(best_excess, excess);
        if (excess > 0.0) {
            continue;
        }
        if (std::abs(heritability_of(t) - target_h2) <= tolerance && marginal_residual(t) <= 1e-9) {
            return t;
        }
    }
    fail(ErrorKind::GenerationFailed,
        "no pure epistatic table with h2 = " + std::to_string(target_h2) + " and maf = " + std::to_string(maf)
            + " found; smallest out-of-range excess " + std::to_string(best_excess));
}

void check_spec(const EpistasisSpec& spec)
{
    require(spec.n_models >= 1, ErrorKind::Contract, "need at least one model");
    require(spec.predictive_snps == 2 * spec.n_models, ErrorKind::Contract, "predictive_snps must equal 2 x n_models");
    require(spec.noise_snps >= 0, ErrorKind::Contract, "noise_snps must be non-negative");
    require(spec.sample_size >= 4, ErrorKind::Contract, "sample_size must be at least 4");
    require(spec.heritability > 0 && spec.heritability < 1, ErrorKind::Contract, "heritability must lie in (0, 1)");
    require(spec.maf > 0 && spec.maf <= 0.5, ErrorKind::Contract, "maf must lie in (0, 0.5]");
}

std::vector<PenetranceTable> generate_tables(const EpistasisSpec& spec, Rng& rng)
{
    check_spec(spec);
    std::vector<PenetranceTable> tables;
    for (int m = 0; m < spec.n_models; ++m) {
        tables.push_back(generate_pure_epistatic_table(spec.heritability, spec.maf, spec.tolerance, rng));
    }
    return tables;
}

EpistasisData simulate_epistatic_dataset(const EpistasisSpec& spec, Rng& rng)
{
    auto tables = generate_tables(spec, rng);
    return simulate_epistatic_dataset(spec, tables, rng);
}

namespace {

int draw_genotype(const GenotypeFrequencies& f, Rng& rng)
{
    const double u = uniform01(rng);
    return u < f[0] ? 0 : (u < f[0] + f[1] ? 1 : 2);
}

} // namespace

EpistasisData simulate_epistatic_dataset(const EpistasisSpec& spec, const std::vector<PenetranceTable>& tables, Rng& rng)
{
    check_spec(spec);
    require(tables.size() == static_cast<std::size_t>(spec.n_models), ErrorKind::Contract, "one table per model required");
    const auto n_pred = static_cast<std::size_t>(spec.predictive_snps);
    const auto n_noise = static_cast<std::size_t>(spec.noise_snps);
    const std::size_t m = n_pred + n_noise;
    const std::size_t n = spec.sample_size;
    const std::size_t want_cases = n / 2;
    const std::size_t want_controls = n - want_cases;

    EpistasisData out;
    out.tables = tables;
    std::uniform_real_distribution<double> maf_dist(0.05, 0.5);
    for (std::size_t j = 0; j < n_noise; ++j) {
        out.noise_mafs.push_back(maf_dist(rng));
    }
    std::vector<GenotypeFrequencies> noise_freq;
    for (double f : out.noise_mafs) {
        noise_freq.push_back(hwe_frequencies(f));
    }
    const auto pred_freq = hwe_frequencies(spec.maf);

    // Column layout: predictive SNPs scattered among the noise SNPs.
    std::vector<std::size_t> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    out.predictive_columns.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_pred));

    std::vector<double> values(n * m);
    LabelVector labels;
    labels.reserve(n);
    std::size_t cases = 0;
    std::size_t controls = 0;
    std::vector<int> g(n_pred);
    while (labels.size() < n) {
        for (auto& v : g) {
            v = draw_genotype(pred_freq, rng);
        }
        double prob = 0.0;
        for (std::size_t k = 0; k < tables.size(); ++k) {
            prob += tables[k].cells[g[2 * k]][g[2 * k + 1]];
        }
        prob /= static_cast<double>(tables.size());
        const bool is_case = bernoulli(rng, prob);
        if (is_case ? cases >= want_cases : controls >= want_controls) {
            continue;
        }
        (is_case ? cases : controls) += 1;
        const std::size_t row = labels.size();
        labels.push_back(is_case ? 1 : 0);
        for (std::size_t s = 0; s < n_pred; ++s) {
            values[perm[s] * n + row] = g[s];
        }
        for (std::size_t s = 0; s < n_noise; ++s) {
            values[perm[n_pred + s] * n + row] = draw_genotype(noise_freq[s], rng);
        }
    }
    std::vector<std::string> names;
    for (std::size_t j = 0; j < m; ++j) {
        names.push_back("X" + std::to_string(j));
    }
    out.data = Dataset(std::move(names), std::move(values), std::move(labels), 2);
    return out;
}

std::string epistasis_metadata_json(const EpistasisSpec& spec, const EpistasisData& d, std::uint64_t seed)
{
    nlohmann::ordered_json doc;
    doc["format"] = "tpot-epistasis-meta/1";
    doc["seed"] = seed;
    doc["heritability"] = spec.heritability;
    doc["maf"] = spec.maf;
    doc["n_models"] = spec.n_models;
    doc["noise_snps"] = spec.noise_snps;
    doc["sample_size"] = spec.sample_size;
    doc["predictive_columns"] = d.predictive_columns;
    nlohmann::ordered_json models = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < d.tables.size(); ++k) {
        nlohmann::ordered_json t;
        t["columns"] = { d.predictive_columns[2 * k], d.predictive_columns[2 * k + 1] };
        t["penetrance"] = d.tables[k].cells;
        t["prevalence"] = prevalence_of(d.tables[k]);
        t["heritability"] = heritability_of(d.tables[k]);
        models.push_back(std::move(t));
    }
    doc["models"] = std::move(models);
    doc["noise_mafs"] = d.noise_mafs;
    return doc.dump(2) + "\n";
}

Dataset generate_hill_valley(const HillValleySpec& spec, Rng& rng)
{
    require(spec.series_length >= 8, ErrorKind::Contract, "series_length must be at least 8");
    require(spec.noise_std >= 0.0, ErrorKind::Contract, "noise_std must be non-negative");
    require(spec.n_samples >= 2, ErrorKind::Contract, "need at least two samples");
    const std::size_t n = spec.n_samples;
    const std::size_t T = spec.series_length;
    LabelVector labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = i < n / 2 ? 0 : 1;
    }
    std::shuffle(labels.begin(), labels.end(), rng);
    const double len = static_cast<double>(T);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<double> values(n * T);
    for (std::size_t i = 0; i < n; ++i) {
        const double base = std::pow(10.0, 4.0 * uniform01(rng));
        const double amp = base * (0.1 + 0.4 * uniform01(rng));
        const double centre = len * (0.2 + 0.6 * uniform01(rng));
        const double width = len * (0.03 + 0.07 * uniform01(rng));
        const double sign = labels[i] == 1 ? 1.0 : -1.0;
        for (std::size_t t = 0; t < T; ++t) {
            const double z = (static_cast<double>(t) - centre) / width;
            double v = base + sign * amp * std::exp(-0.5 * z * z);
            if (spec.noise_std > 0.0) {
                v += spec.noise_std * noise(rng);
            }
            values[t * n + i] = v;
        }
    }
    std::vector<std::string> names;
    for (std::size_t t = 0; t < T; ++t) {
        names.push_back("X" + std::to_string(t + 1));
    }
    return { std::move(names), std::move(values), std::move(labels), 2 };
}

Label hill_valley_rule(std::span<const double> series)
{
    std::vector<double> v(series.begin(), series.end());
    std::sort(v.begin(), v.end());
    const double med = v.size() % 2 == 1 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
    return v.back() - med > med - v.front() ? 1 : 0;
}

namespace {

void append_number(std::string& out, double v)
{
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    out.append(buf, res.ptr);
}

} // namespace

void write_csv(const Dataset& ds, const std::string& path)
{
    require(ds.cols() > 0, ErrorKind::Contract, "refusing to write a dataset without features to " + path);
    std::ofstream f(path, std::ios::binary);
    require(f.good(), ErrorKind::Io, "cannot open " + path + " for writing");
    std::string line;
    for (const auto& name : ds.feature_names()) {
        line += name;
        line += ',';
    }
    line += "class\n";
    f << line;
    for (std::size_t i = 0; i < ds.rows(); ++i) {
        line.clear();
        for (std::size_t j = 0; j < ds.cols(); ++j) {
            append_number(line, ds.at(i, j));
            line += ',';
        }
        line += std::to_string(ds.labels()[i]);
        line += '\n';
        f << line;
    }
    f.flush();
    require(f.good(), ErrorKind::Io, "write failed for " + path);
}

} // namespace tpot

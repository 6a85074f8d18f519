#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "rng.hpp"

namespace tpot {

using GenotypeFrequencies = std::array<double, 3>;

// Hardy-Weinberg genotype frequencies for minor allele frequency p.
GenotypeFrequencies hwe_frequencies(double maf);

struct PenetranceTable {
    double maf = 0.2;
    std::array<std::array<double, 3>, 3> cells {}; // cells[i][j]: P(case | genotypes i, j)
};

// Population prevalence K = sum_g P(g) f_g.
double prevalence_of(const PenetranceTable& t);

// h^2 = sum_g P(g) (f_g - K)^2 / (K (1 - K)). Throws UndefinedHeritability
// when K is 0 or 1.
double heritability_of(const PenetranceTable& t);

// Largest deviation of any row or column marginal penetrance from K.
double marginal_residual(const PenetranceTable& t);

inline constexpr int kTableSearchAttempts = 200000;

// Random-restart search: a uniform random table is projected onto the
// zero-marginal subspace (weighted double centering), a prevalence K is
// drawn, and the deviations are scaled so that h^2 hits the target. Cells
// leaving [0, 1] reject the draw. Throws GenerationFailed when no draw fits.
PenetranceTable generate_pure_epistatic_table(double target_h2, double maf, double tolerance, Rng& rng,
    int attempts = kTableSearchAttempts);

struct EpistasisSpec {
    double heritability = 0.4;
    double maf = 0.2;
    int n_models = 4;
    int predictive_snps = 8;
    int noise_snps = 92;
    std::size_t sample_size = 800;
    double tolerance = 0.01;
};

struct EpistasisData {
    Dataset data;
    std::vector<PenetranceTable> tables;
    // Column of each predictive SNP; model m uses columns 2m and 2m+1 here.
    std::vector<std::size_t> predictive_columns;
    std::vector<double> noise_mafs;
};

void check_spec(const EpistasisSpec& spec);

std::vector<PenetranceTable> generate_tables(const EpistasisSpec& spec, Rng& rng);

EpistasisData simulate_epistatic_dataset(const EpistasisSpec& spec, Rng& rng);
// Uses the given tables (one per model) instead of generating new ones.
EpistasisData simulate_epistatic_dataset(const EpistasisSpec& spec, const std::vector<PenetranceTable>& tables, Rng& rng);

// Sidecar document listing predictive columns and tables.
std::string epistasis_metadata_json(const EpistasisSpec& spec, const EpistasisData& d, std::uint64_t seed);

struct HillValleySpec {
    std::size_t series_length = 100;
    double noise_std = 0.0;
    std::size_t n_samples = 606;
};

// Class 1 = hill (bump), class 0 = valley (dip). Each row has a log-uniform
// baseline in [1, 1e4] and a bump of amplitude 10-50% of the baseline.
Dataset generate_hill_valley(const HillValleySpec& spec, Rng& rng);

// Rule oracle: hill iff the maximum sits further above the median than the
// minimum sits below it.
Label hill_valley_rule(std::span<const double> series);

// Header of feature names plus "class"; one line per row.
void write_csv(const Dataset& ds, const std::string& path);

} // namespace tpot

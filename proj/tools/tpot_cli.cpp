// Command-line front end. Talks to the engine only through the C API.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tpot/tpot.h"

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kRun = 3 };

int exit_code(tpot_status s)
{
    switch (s) {
    case TPOT_OK: return kOk;
    case TPOT_ERR_INVALID_ARGUMENT:
    case TPOT_ERR_USAGE: return kUsage;
    case TPOT_ERR_PARSE:
    case TPOT_ERR_SCHEMA:
    case TPOT_ERR_IO:
    case TPOT_ERR_DATA:
    case TPOT_ERR_GENERATION: return kData;
    default: return kRun;
    }
}

int report(tpot_status s, const char* what)
{
    if (s != TPOT_OK) {
        std::fprintf(stderr, "tpot %s: %s error: %s\n", what, tpot_status_name(s), tpot_last_error());
    }
    return exit_code(s);
}

struct Owned {
    char* s = nullptr;
    ~Owned() { tpot_string_free(s); }
};

bool read_file(const std::string& path, std::string& out)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        return false;
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    out = ss.str();
    return true;
}

bool write_file(const std::string& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    f << text;
    return static_cast<bool>(f);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app { "Evolutionary search over tree-shaped machine learning pipelines" };
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(tpot_version()));
    int code = kOk;

    // gen-epistasis
    tpot_epistasis_params ep;
    tpot_epistasis_params_default(&ep);
    std::uint64_t ep_seed = 0;
    std::string ep_out;
    auto* gen_epi = app.add_subcommand("gen-epistasis", "Simulate a purely epistatic SNP dataset");
    gen_epi->add_option("--heritability", ep.heritability, "Heritability of each two-locus model")->capture_default_str();
    gen_epi->add_option("--maf", ep.maf, "Minor allele frequency of predictive SNPs")->capture_default_str();
    gen_epi->add_option("--sample-size", ep.sample_size, "Rows (half cases, half controls)")->capture_default_str();
    gen_epi->add_option("--models", ep.models, "Number of two-locus models")->capture_default_str();
    gen_epi->add_option("--noise-snps", ep.noise_snps, "Non-predictive SNP columns")->capture_default_str();
    gen_epi->add_option("--seed", ep_seed)->capture_default_str();
    gen_epi->add_option("--out", ep_out, "CSV path; metadata goes to <out>.meta.json")->required();
    gen_epi->callback([&] {
        tpot_dataset* ds = nullptr;
        Owned meta;
        auto s = tpot_generate_epistasis(&ep, ep_seed, &ds, &meta.s);
        if (s == TPOT_OK) {
            s = tpot_dataset_write_csv(ds, ep_out.c_str());
        }
        tpot_dataset_free(ds);
        if (s == TPOT_OK && !write_file(ep_out + ".meta.json", meta.s)) {
            std::fprintf(stderr, "tpot gen-epistasis: cannot write %s.meta.json\n", ep_out.c_str());
            code = kData;
            return;
        }
        code = report(s, "gen-epistasis");
    });

    // gen-hillvalley
    tpot_hill_valley_params hv;
    tpot_hill_valley_params_default(&hv);
    std::uint64_t hv_seed = 0;
    std::string hv_out;
    auto* gen_hv = app.add_subcommand("gen-hillvalley", "Generate hill/valley series");
    gen_hv->add_option("--samples", hv.samples)->capture_default_str();
    gen_hv->add_option("--length", hv.length)->capture_default_str();
    gen_hv->add_option("--noise", hv.noise_std, "Standard deviation of additive noise")->capture_default_str();
    gen_hv->add_option("--seed", hv_seed)->capture_default_str();
    gen_hv->add_option("--out", hv_out)->required();
    gen_hv->callback([&] {
        tpot_dataset* ds = nullptr;
        auto s = tpot_generate_hill_valley(&hv, hv_seed, &ds);
        if (s == TPOT_OK) {
            s = tpot_dataset_write_csv(ds, hv_out.c_str());
        }
        tpot_dataset_free(ds);
        code = report(s, "gen-hillvalley");
    });

    // evolve
    tpot_gp_config gp;
    tpot_gp_config_default(&gp);
    std::string ev_data, ev_label = "class", ev_mode = "standard", ev_out;
    auto* evolve = app.add_subcommand("evolve", "Run a pipeline search on a CSV dataset");
    evolve->add_option("--data", ev_data)->required();
    evolve->add_option("--label-col", ev_label)->capture_default_str();
    evolve->add_option("--mode", ev_mode)->check(CLI::IsMember({ "standard", "pareto", "random" }))->capture_default_str();
    evolve->add_option("--pop", gp.population_size)->capture_default_str();
    evolve->add_option("--gens", gp.generations)->capture_default_str();
    evolve->add_option("--seed", gp.seed)->capture_default_str();
    evolve->add_option("--budget-ms", gp.eval_budget_millis, "Per-pipeline evaluation budget, 0 = none")->capture_default_str();
    evolve->add_option("--workers", gp.workers)->capture_default_str();
    evolve->add_option("--out", ev_out, "Run document path");
    evolve->callback([&] {
        gp.mode = ev_mode == "pareto" ? TPOT_MODE_PARETO : ev_mode == "random" ? TPOT_MODE_RANDOM : TPOT_MODE_STANDARD;
        tpot_dataset* ds = nullptr;
        tpot_run* run = nullptr;
        auto s = tpot_dataset_load_csv(ev_data.c_str(), ev_label.c_str(), &ds);
        if (s == TPOT_OK) {
            s = tpot_search(ds, &gp, &run);
        }
        if (s == TPOT_OK) {
            int has_best = 0;
            double acc = 0;
            size_t size = 0;
            tpot_run_best(run, &has_best, &acc, &size);
            Owned text;
            if (has_best && tpot_run_render_best(run, &text.s) == TPOT_OK) {
                std::printf("best internal balanced accuracy %.4f, %zu operators\n%s\n", acc, size, text.s);
            } else {
                std::printf("no pipeline evaluated successfully\n");
            }
            std::printf("evaluations %zu\n", tpot_run_evaluations(run));
            if (!ev_out.empty()) {
                Owned doc;
                s = tpot_run_to_json(run, 1, &doc.s);
                if (s == TPOT_OK && !write_file(ev_out, doc.s)) {
                    std::fprintf(stderr, "tpot evolve: cannot write %s\n", ev_out.c_str());
                    code = kData;
                }
            }
        }
        tpot_run_free(run);
        tpot_dataset_free(ds);
        if (code == kOk) {
            code = report(s, "evolve");
        }
    });

    // baseline-rf
    std::string rf_data, rf_label = "class";
    size_t rf_trees = 500;
    std::uint64_t rf_seed = 0;
    auto* baseline = app.add_subcommand("baseline-rf", "Random forest on an outer 75/25 split");
    baseline->add_option("--data", rf_data)->required();
    baseline->add_option("--label-col", rf_label)->capture_default_str();
    baseline->add_option("--trees", rf_trees)->capture_default_str();
    baseline->add_option("--seed", rf_seed)->capture_default_str();
    baseline->callback([&] {
        tpot_dataset* ds = nullptr;
        double acc = 0;
        auto s = tpot_dataset_load_csv(rf_data.c_str(), rf_label.c_str(), &ds);
        if (s == TPOT_OK) {
            s = tpot_rf_baseline(ds, rf_trees, rf_seed, &acc);
        }
        tpot_dataset_free(ds);
        if (s == TPOT_OK) {
            std::printf("holdout balanced accuracy %.4f\n", acc);
        }
        code = report(s, "baseline-rf");
    });

    // bench
    std::string bench_spec, bench_out;
    size_t bench_workers = 0;
    auto* bench = app.add_subcommand("bench", "Run a replicate experiment document");
    bench->add_option("--spec", bench_spec, "tpot-experiment/1 document")->required();
    bench->add_option("--workers", bench_workers, "Concurrent jobs (overrides the document)");
    bench->add_option("--out-dir", bench_out, "Output directory (overrides the document)");
    bench->callback([&] {
        std::string text;
        if (!read_file(bench_spec, text)) {
            std::fprintf(stderr, "tpot bench: cannot read %s\n", bench_spec.c_str());
            code = kData;
            return;
        }
        Owned body;
        const auto s = tpot_bench(text.c_str(), bench_workers, bench_out.empty() ? nullptr : bench_out.c_str(), &body.s);
        if (s == TPOT_OK) {
            const auto doc = nlohmann::json::parse(body.s);
            for (const auto& arm : doc.at("summary")) {
                if (arm.at("completed").get<int>() == 0) {
                    std::printf("%-14s no completed replicates (%d failed)\n", arm.at("arm").get<std::string>().c_str(),
                        arm.at("failed").get<int>());
                    continue;
                }
                std::printf("%-14s median %.4f  ci95 [%.4f, %.4f]  mean size %.2f  (%d ok, %d failed)\n",
                    arm.at("arm").get<std::string>().c_str(), arm.at("median_accuracy").get<double>(),
                    arm.at("median_ci95")[0].get<double>(), arm.at("median_ci95")[1].get<double>(),
                    arm.at("mean_size").get<double>(), arm.at("completed").get<int>(), arm.at("failed").get<int>());
            }
        }
        code = report(s, "bench");
    });

    // export
    std::string ex_run, ex_out;
    auto* exp = app.add_subcommand("export", "Write the best pipeline of a run document");
    exp->add_option("--run", ex_run)->required();
    exp->add_option("--out", ex_out)->required();
    exp->callback([&] {
        std::string text;
        if (!read_file(ex_run, text)) {
            std::fprintf(stderr, "tpot export: cannot read %s\n", ex_run.c_str());
            code = kData;
            return;
        }
        tpot_run* run = nullptr;
        auto s = tpot_run_from_json(text.c_str(), &run);
        if (s == TPOT_OK) {
            s = tpot_run_export(run, ex_out.c_str());
        }
        tpot_run_free(run);
        code = report(s, "export");
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }
    return code;
}

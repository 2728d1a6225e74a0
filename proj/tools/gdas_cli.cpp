#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "gdas/campaign.hpp"
#include "gdas/uqprop.hpp"

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string file_hash(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016zx", std::hash<std::string>{}(ss.str()));
    return buf;
}

int cmd_doe(const std::string& problem_id, const std::string& sequence, int size,
            int skip, const std::string& out_path, bool quiet) {
    const gdas::Problem problem = gdas::make_problem(problem_id);
    const int d = problem.space.dimension();
    std::vector<gdas::Vec> unit;
    if (sequence == "sobol") unit = gdas::sobol_sequence(d, size, skip);
    else if (sequence == "halton") unit = gdas::halton_sequence(d, size);
    else throw gdas::ConfigError("unknown sequence: " + sequence);

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw std::runtime_error("cannot write " + out_path);
        out = &file;
    }
    *out << "index";
    for (const auto& m : problem.space.marginals) *out << ',' << m.name;
    *out << '\n';
    for (int i = 0; i < size; ++i) {
        const gdas::Vec xi = gdas::transform(unit[i], problem.space);
        *out << i;
        for (int j = 0; j < d; ++j) *out << ',' << fmt_double(xi[j]);
        *out << '\n';
    }
    if (!quiet && !out_path.empty())
        std::cerr << "wrote " << size << " points to " << out_path << '\n';
    return 0;
}

void print_summary(const gdas::CampaignState& state, std::ostream& out) {
    nlohmann::json j;
    j["problem"] = state.config.problem_id;
    j["training_samples"] = state.train.size();
    j["completed_infills"] = state.completed_infills;
    if (!state.records.empty()) {
        const auto& r = state.records.back();
        j["final"] = {{"iteration", r.iteration},
                      {"r2_lift", r.r2_lift},
                      {"nrmse_lift", r.nrmse_lift},
                      {"r2_drag", r.r2_drag},
                      {"nrmse_drag", r.nrmse_drag},
                      {"field_nrmse", r.field_nrmse},
                      {"mean_sigma_gp_lift", r.mean_sigma_gp_lift},
                      {"mean_sigma_gp_drag", r.mean_sigma_gp_drag},
                      {"mean_sigma_field", r.mean_sigma_field}};
        j["targets_met"] = {
            {"r2", r.r2_lift >= state.config.target_r2 &&
                       r.r2_drag >= state.config.target_r2},
            {"nrmse", r.nrmse_lift <= state.config.target_nrmse &&
                          r.nrmse_drag <= state.config.target_nrmse}};
    }
    out << j.dump(1, '\t') << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Goal-driven adaptive sampling for field surrogates"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    bool quiet = false;
    uint64_t global_seed = 0;
    bool seed_given = false;
    std::string out_dir;
    app.add_flag("--quiet", quiet, "Suppress progress output");
    app.add_option("--seed", global_seed, "Override the campaign seed")
        ->each([&](const std::string&) { seed_given = true; });
    app.add_option("--out-dir", out_dir, "Output directory");

    // doe
    auto* doe = app.add_subcommand("doe", "Emit a quasi-random DoE as CSV");
    std::string doe_problem = "p1", doe_sequence = "sobol", doe_out;
    int doe_size = 30, doe_skip = 1;
    doe->add_option("--problem", doe_problem, "Problem id (p1, p2)");
    doe->add_option("--sequence", doe_sequence, "sobol or halton");
    doe->add_option("--size", doe_size, "Number of points");
    doe->add_option("--skip", doe_skip, "Leading Sobol points to discard");
    doe->add_option("--out", doe_out, "Output CSV path (default stdout)");

    // run
    auto* run = app.add_subcommand("run", "Execute a campaign from a config file");
    std::string run_config, run_state;
    int run_max_additional = -1;
    run->add_option("--config", run_config, "Campaign config JSON");
    run->add_option("--state", run_state, "Resume from a saved state.json");
    run->add_option("--max-infills", run_max_additional,
                    "Stop after this many additional infills (resume use)");

    // report
    auto* report = app.add_subcommand("report", "Emit metrics/trace CSVs and a summary");
    std::string report_state;
    report->add_option("--state", report_state, "Campaign state.json")->required();

    // propagate
    auto* prop = app.add_subcommand("propagate", "Surrogate-based UQ propagation");
    std::string prop_state;
    int prop_n = 10000;
    bool prop_epistemic = false;
    prop->add_option("--state", prop_state, "Campaign state.json")->required();
    prop->add_option("--n", prop_n, "Number of QMC samples");
    prop->add_flag("--epistemic", prop_epistemic,
                   "Add epistemic std in quadrature (sensitivity study)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (doe->parsed())
            return cmd_doe(doe_problem, doe_sequence, doe_size, doe_skip, doe_out, quiet);

        if (run->parsed()) {
            if (run_config.empty() == run_state.empty())
                throw gdas::ConfigError("run: pass exactly one of --config or --state");
            gdas::CampaignState state;
            if (!run_config.empty()) {
                std::ifstream f(run_config);
                if (!f) throw std::runtime_error("cannot read " + run_config);
                gdas::CampaignConfig config =
                    gdas::CampaignConfig::from_json(nlohmann::json::parse(f));
                if (seed_given) config.seed = global_seed;
                state = gdas::run_campaign(config, out_dir);
            } else {
                state = gdas::load_state(run_state);
                gdas::continue_campaign(state, out_dir, run_max_additional);
                if (out_dir.empty()) gdas::save_state(state, run_state);
            }
            if (!quiet) print_summary(state, std::cerr);
            return 0;
        }

        if (report->parsed()) {
            const gdas::CampaignState state = gdas::load_state(report_state);
            namespace fs = std::filesystem;
            const fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
            fs::create_directories(dir);
            gdas::write_metrics_csv(state, (dir / "metrics.csv").string());
            gdas::write_trace_csv(state, (dir / "trace.csv").string());
            std::ofstream summary(dir / "summary.json");
            print_summary(state, summary);
            if (!quiet) print_summary(state, std::cout);
            return 0;
        }

        if (prop->parsed()) {
            const gdas::CampaignState state = gdas::load_state(prop_state);
            const gdas::SurrogateBundle bundle = gdas::rebuild_surrogates(state);
            gdas::UqConfig cfg;
            cfg.n_qmc = prop_n;
            cfg.seed = seed_given ? global_seed : state.config.seed;
            cfg.include_epistemic = prop_epistemic;
            const gdas::UqReport rep =
                gdas::propagate(bundle, cfg, file_hash(prop_state));
            const gdas::Problem problem = gdas::make_problem(state.config.problem_id);
            gdas::export_report(rep, problem.mesh,
                                out_dir.empty() ? "." : out_dir);
            if (!quiet) std::cerr << rep.to_json()["scalars"].dump(1, '\t') << '\n';
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

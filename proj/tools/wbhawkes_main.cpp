// Command-line front end: synthetic data generation, penalized EM fitting,
// metric evaluation, Granger/infectivity reporting and parameter sweeps.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wbhawkes/cli_support.hpp"
#include "wbhawkes/dataio.hpp"
#include "wbhawkes/errors.hpp"
#include "wbhawkes/granger.hpp"
#include "wbhawkes/learn.hpp"
#include "wbhawkes/simulate.hpp"

namespace fs = std::filesystem;
using namespace wbhawkes;

namespace {

struct FitFlags {
    std::string mode = "wb-sgl";
    std::optional<double> alpha_s;
    std::optional<double> alpha_g;
    std::optional<double> alpha_rho;
    std::size_t k_rho_steps = 5;
    double inner_tol = 1e-6;
    std::size_t max_inner = 100;
    std::size_t max_outer = 200;
    double validation_fraction = 0.2;
    std::size_t patience = 3;
    double rho_floor = 0.05;
    std::size_t basis_m = 7;
    double basis_support = 5.0;
    std::optional<double> basis_bandwidth;

    void register_options(CLI::App* cmd) {
        cmd->add_option("--mode", mode, "model variant: wb-sgl|wb-s|wb-gl|wb|mle-sgl|mle-s|mle-gl|mle")
            ->check(CLI::IsMember({"wb-sgl", "wb-s", "wb-gl", "wb", "mle-sgl", "mle-s", "mle-gl", "mle"}));
        cmd->add_option("--alpha-s", alpha_s, "L1 weight (default 10 when the mode uses it)")
            ->check(CLI::NonNegativeNumber);
        cmd->add_option("--alpha-g", alpha_g, "group-lasso weight (default 100 when the mode uses it)")
            ->check(CLI::NonNegativeNumber);
        cmd->add_option("--alpha-rho", alpha_rho, "rho learning rate (default 1e-3 / #training sequences)")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--k-rho", k_rho_steps, "rho gradient steps per outer iteration")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--inner-tol", inner_tol, "relative objective change treated as converged")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--max-inner", max_inner, "inner iteration cap")->check(CLI::PositiveNumber);
        cmd->add_option("--max-outer", max_outer, "outer iteration cap")->check(CLI::PositiveNumber);
        cmd->add_option("--validation-fraction", validation_fraction, "held-out fraction for early stopping")
            ->check(CLI::Range(0.0, 0.999));
        cmd->add_option("--patience", patience, "outer iterations without validation improvement before stopping");
        cmd->add_option("--rho-floor", rho_floor, "lower bound for rho")->check(CLI::PositiveNumber);
        cmd->add_option("--basis-m", basis_m, "number of Gaussian kernels")->check(CLI::PositiveNumber);
        cmd->add_option("--basis-support", basis_support, "impact support length")->check(CLI::PositiveNumber);
        cmd->add_option("--basis-bandwidth", basis_bandwidth,
                        "kernel bandwidth (default: half the center spacing)")
            ->check(CLI::PositiveNumber);
    }

    FitConfig config() const {
        FitConfig cfg;
        apply_mode(cfg, parse_mode(mode), alpha_s, alpha_g);
        cfg.alpha_rho = alpha_rho;
        cfg.k_rho_steps = k_rho_steps;
        cfg.inner_tol = inner_tol;
        cfg.max_inner = max_inner;
        cfg.max_outer = max_outer;
        cfg.validation_fraction = validation_fraction;
        cfg.patience = patience;
        cfg.rho_floor = rho_floor;
        return cfg;
    }

    BasisConfig basis() const {
        return BasisConfig::evenly_spaced(basis_m, basis_support, basis_bandwidth.value_or(0.0));
    }
};

const char* stop_reason_name(StopReason reason) {
    switch (reason) {
        case StopReason::converged: return "converged";
        case StopReason::early_stopped: return "early_stopped";
        case StopReason::max_iterations: return "max_iterations";
    }
    return "max_iterations";
}

void run_synth(const std::string& kind, std::size_t n, std::size_t test_n, double horizon,
               bool constant_base, const std::string& time_unit, std::uint64_t seed,
               const fs::path& out, const std::optional<fs::path>& test_out) {
    if (test_n > 0 && !test_out)
        throw std::invalid_argument("synth: --test-n requires --test-out");
    const SynthKind synth_kind = kind == "sine" ? SynthKind::sine : SynthKind::square;
    // Training and test sequences come from one generated collection, so
    // both share the seed's mu/rho draw and use disjoint RNG streams.
    auto result = synth_protocol(synth_kind, n + test_n, horizon, seed, constant_base);

    const auto write_part = [&](const fs::path& prefix, std::size_t begin, std::size_t count) {
        Dataset dataset;
        dataset.sequences.assign(result.dataset.begin() + static_cast<long>(begin),
                                 result.dataset.begin() + static_cast<long>(begin + count));
        dataset.c_count = result.truth.c_count;
        dataset.time_unit = time_unit;
        fs::path csv = prefix;
        csv += ".csv";
        write_dataset(dataset, csv);
        std::size_t events = 0;
        for (const auto& seq : dataset.sequences) events += seq.events.size();
        std::cout << "wrote " << count << " sequences (" << events << " events, C="
                  << dataset.c_count << ") to " << csv.string() << "\n";
    };
    write_part(out, 0, n);
    fs::path truth_path = out;
    truth_path += ".truth.json";
    write_ground_truth(result.truth, truth_path);
    if (test_n > 0) write_part(*test_out, n, test_n);
}

void run_fit(const fs::path& data_path, const FitFlags& flags, std::uint64_t seed, std::size_t threads,
             bool strict, const fs::path& out) {
    const Dataset dataset = read_dataset(data_path);
    const FitConfig cfg = flags.config();
    const auto report = em_fit(dataset.sequences, dataset.c_count, flags.basis(), cfg, seed, threads);

    fs::path model_path = out;
    model_path += ".model.json";
    write_model(report.params, model_path);

    nlohmann::json doc;
    doc["mode"] = flags.mode;
    doc["alpha_s"] = cfg.alpha_s;
    doc["alpha_g"] = cfg.alpha_g;
    if (cfg.alpha_rho) doc["alpha_rho"] = *cfg.alpha_rho;
    doc["freeze_rho"] = cfg.freeze_rho;
    doc["seed"] = seed;
    doc["stop_reason"] = stop_reason_name(report.stop_reason);
    doc["objective_trace"] = report.objective_trace;
    doc["validation_trace"] = report.validation_trace;
    fs::path report_path = out;
    report_path += ".fit.json";
    detail::store_text(report_path, doc.dump(2) + "\n", "fit report");

    std::cout << "fit " << flags.mode << " on " << dataset.sequences.size() << " sequences: "
              << stop_reason_name(report.stop_reason) << " after " << report.objective_trace.size()
              << " outer iterations -> " << model_path.string() << "\n";
    if (strict && report.stop_reason == StopReason::max_iterations)
        throw NumericalError("fit did not converge within --max-outer iterations");
}

void run_eval(const fs::path& model_path, const fs::path& data_path,
              const std::optional<fs::path>& truth_path, double zero_threshold, std::size_t threads,
              const std::optional<fs::path>& out) {
    const ModelParams model = read_model(model_path);
    const Dataset dataset = read_dataset(data_path);
    if (model.c_count != dataset.c_count)
        throw DataError("eval: model has C=" + std::to_string(model.c_count) +
                        " but the dataset declares C=" + std::to_string(dataset.c_count));
    std::optional<GroundTruth> truth;
    if (truth_path) truth = read_ground_truth(*truth_path);
    const MetricsReport metrics =
        compute_metrics(model, truth ? &*truth : nullptr, dataset.sequences, zero_threshold, threads);
    const std::string text = metrics_to_json(metrics).dump(2) + "\n";
    if (out) {
        detail::store_text(*out, text, "metrics");
        std::cout << "wrote metrics to " << out->string() << "\n";
    } else {
        std::cout << text;
    }
}

void run_granger(const fs::path& model_path, double threshold, std::size_t top,
                 std::size_t curve_points, const TriggerClassifyConfig& classify_cfg,
                 const fs::path& out) {
    const ModelParams model = read_model(model_path);
    const auto report = make_infectivity_report(model, threshold, classify_cfg);

    fs::path json_path = out;
    json_path += ".granger.json";
    detail::store_text(json_path, infectivity_report_to_json(report).dump(2) + "\n", "granger report");
    fs::path matrix_path = out;
    matrix_path += ".infectivity.csv";
    write_matrix_csv(report.matrix, matrix_path);

    for (const auto& [c, cs] : top_infectivity_pairs(report.matrix, top)) {
        fs::path curve_path = out;
        curve_path += ".phi_" + std::to_string(c + 1) + "_" + std::to_string(cs + 1) + ".csv";
        write_impact_curve_csv(model, c, cs, curve_path, curve_points);
    }
    std::cout << "infectivity matrix (" << report.c_count << "x" << report.c_count << "), "
              << report.edges.size() << " edges -> " << matrix_path.string() << "\n";
}

void run_sweep(const fs::path& data_path, const std::optional<fs::path>& truth_path,
               const std::optional<fs::path>& test_path, const FitFlags& flags,
               std::vector<double> alpha_s_grid, std::vector<double> alpha_g_grid,
               std::vector<std::size_t> n_grid, double zero_threshold, std::uint64_t seed,
               std::size_t threads, const fs::path& out) {
    const Dataset dataset = read_dataset(data_path);
    std::optional<GroundTruth> truth;
    if (truth_path) truth = read_ground_truth(*truth_path);
    Dataset test;
    if (test_path) {
        test = read_dataset(*test_path);
        if (test.c_count != dataset.c_count)
            throw DataError("sweep: test dataset declares a different C than the training data");
    }

    const FitConfig base_cfg = flags.config();
    if (alpha_s_grid.empty()) alpha_s_grid = {base_cfg.alpha_s};
    if (alpha_g_grid.empty()) alpha_g_grid = {base_cfg.alpha_g};
    if (n_grid.empty()) n_grid = {dataset.sequences.size()};

    const auto fmt = [](std::optional<double> v) { return v ? detail::format_double(*v) : std::string(); };
    std::string csv = "n,alpha_s,alpha_g,loglike_test,e_mu,e_rho,e_h,e_phi,granger_accuracy\n";
    for (std::size_t n : n_grid) {
        if (n < 1 || n > dataset.sequences.size())
            throw DataError("sweep: --n-grid entry " + std::to_string(n) + " exceeds the dataset size");
        const std::vector<EventSequence> subset(dataset.sequences.begin(),
                                                dataset.sequences.begin() + static_cast<long>(n));
        for (double a_s : alpha_s_grid) {
            for (double a_g : alpha_g_grid) {
                FitConfig cfg = base_cfg;
                cfg.alpha_s = a_s;
                cfg.alpha_g = a_g;
                const auto report = em_fit(subset, dataset.c_count, flags.basis(), cfg, seed, threads);
                const MetricsReport metrics = compute_metrics(report.params, truth ? &*truth : nullptr,
                                                              test.sequences, zero_threshold, threads);
                csv += std::to_string(n) + ',' + detail::format_double(a_s) + ',' +
                       detail::format_double(a_g) + ',' + fmt(metrics.loglike_test) + ',' +
                       fmt(metrics.e_mu) + ',' + fmt(metrics.e_rho) + ',' + fmt(metrics.e_h) + ',' +
                       fmt(metrics.e_phi) + ',' + fmt(metrics.granger_accuracy) + '\n';
                std::cerr << "sweep cell n=" << n << " alpha_s=" << a_s << " alpha_g=" << a_g << " done\n";
            }
        }
    }
    detail::store_text(out, csv, "sweep");
    const std::size_t rows = n_grid.size() * alpha_s_grid.size() * alpha_g_grid.size();
    std::cout << "wrote " << rows << " sweep rows to " << out.string() << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weibull-base multivariate Hawkes processes: simulation by thinning, penalized EM"
                 " learning, evaluation metrics and Granger/infectivity analysis"};
    app.require_subcommand(1);
    app.fallthrough();

    std::uint64_t seed = 0;
    std::size_t threads = 0;
    app.add_option("--seed", seed, "master seed for every stochastic step");
    app.add_option("--threads", threads, "worker threads (0 = machine parallelism)");

    // synth
    auto* synth = app.add_subcommand("synth", "generate block-structured synthetic event sequences");
    std::string synth_kind = "sine";
    std::size_t synth_n = 500;
    std::size_t synth_test_n = 0;
    double synth_horizon = 50.0;
    bool constant_base = false;
    std::string time_unit = "units";
    std::string synth_out;
    std::optional<fs::path> synth_test_out;
    synth->add_option("--kind", synth_kind, "impact kernel family")
        ->required()
        ->check(CLI::IsMember({"sine", "square"}));
    synth->add_option("--n", synth_n, "number of sequences")->check(CLI::PositiveNumber);
    synth->add_option("--T", synth_horizon, "window length per sequence")->check(CLI::PositiveNumber);
    synth->add_flag("--constant-base", constant_base, "force rho = 1 (constant base intensity)");
    synth->add_option("--time-unit", time_unit, "time unit label stored in the metadata");
    synth->add_option("--out", synth_out, "output prefix (<out>.csv, <out>.meta.json, <out>.truth.json)")
        ->required();
    synth->add_option("--test-n", synth_test_n,
                      "additionally generate this many held-out sequences from the same truth");
    synth->add_option("--test-out", synth_test_out, "output prefix for the held-out split");
    synth->callback([&] {
        run_synth(synth_kind, synth_n, synth_test_n, synth_horizon, constant_base, time_unit, seed,
                  synth_out, synth_test_out);
    });

    // fit
    auto* fit = app.add_subcommand("fit", "learn model parameters by penalized EM");
    FitFlags fit_flags;
    std::string fit_data, fit_out;
    bool strict = false;
    fit->add_option("--data", fit_data, "training dataset CSV")->required()->check(CLI::ExistingFile);
    fit->add_option("--out", fit_out, "output prefix (<out>.model.json, <out>.fit.json)")->required();
    fit_flags.register_options(fit);
    fit->add_flag("--strict", strict, "exit nonzero when the fit hits --max-outer without converging");
    fit->callback([&] { run_fit(fit_data, fit_flags, seed, threads, strict, fit_out); });

    // eval
    auto* eval = app.add_subcommand("eval", "compute measure criteria for a fitted model");
    std::string eval_model, eval_data;
    std::optional<fs::path> eval_truth, eval_out;
    double zero_threshold = 1e-2;
    eval->add_option("--model", eval_model, "model JSON")->required()->check(CLI::ExistingFile);
    eval->add_option("--data", eval_data, "test dataset CSV")->required()->check(CLI::ExistingFile);
    eval->add_option("--truth", eval_truth, "ground-truth JSON (enables e_mu/e_rho/e_h/e_phi/accuracy)")
        ->check(CLI::ExistingFile);
    eval->add_option("--zero-threshold", zero_threshold, "relative group-norm cutoff for zero pairs")
        ->check(CLI::PositiveNumber);
    eval->add_option("--out", eval_out, "metrics JSON path (default: stdout)");
    eval->callback([&] { run_eval(eval_model, eval_data, eval_truth, zero_threshold, threads, eval_out); });

    // granger
    auto* granger = app.add_subcommand("granger", "infectivity matrix, causality graph, trigger patterns");
    std::string granger_model, granger_out;
    double edge_threshold = 1e-2;
    std::size_t top = 0;
    std::size_t curve_points = 1001;
    TriggerClassifyConfig classify_cfg;
    granger->add_option("--model", granger_model, "model JSON")->required()->check(CLI::ExistingFile);
    granger->add_option("--out", granger_out,
                        "output prefix (<out>.granger.json, <out>.infectivity.csv, <out>.phi_c_c'.csv)")
        ->required();
    granger->add_option("--threshold", edge_threshold, "relative group-norm edge threshold")
        ->check(CLI::NonNegativeNumber);
    granger->add_option("--top", top, "emit plot CSVs for the K largest-infectivity impact functions");
    granger->add_option("--curve-points", curve_points, "samples per emitted curve")
        ->check(CLI::Range(std::size_t{2}, std::size_t{10000000}));
    granger->add_option("--grid-points", classify_cfg.grid_points, "classification grid resolution")
        ->check(CLI::Range(std::size_t{8}, std::size_t{10000000}));
    granger->add_option("--delay-frac", classify_cfg.delay_frac, "initial-quiet cutoff, fraction of peak")
        ->check(CLI::PositiveNumber);
    granger->add_option("--min-delay", classify_cfg.min_delay, "shortest quiet span counting as delay")
        ->check(CLI::PositiveNumber);
    granger->add_option("--stable-window", classify_cfg.stable_window, "decay deadline for stable edges")
        ->check(CLI::PositiveNumber);
    granger->add_option("--stable-frac", classify_cfg.stable_frac, "decay level, fraction of peak")
        ->check(CLI::PositiveNumber);
    granger->add_option("--salience-frac", classify_cfg.salience_frac, "reported-peak cutoff, fraction of peak")
        ->check(CLI::PositiveNumber);
    granger->callback([&] {
        run_granger(granger_model, edge_threshold, top, curve_points, classify_cfg, granger_out);
    });

    // sweep
    auto* sweep = app.add_subcommand("sweep", "re-run fit + eval over dataset-size / alpha grids");
    std::string sweep_data, sweep_out;
    std::optional<fs::path> sweep_truth, sweep_test;
    FitFlags sweep_flags;
    std::vector<double> alpha_s_grid, alpha_g_grid;
    std::vector<std::size_t> n_grid;
    double sweep_zero_threshold = 1e-2;
    sweep->add_option("--data", sweep_data, "training dataset CSV")->required()->check(CLI::ExistingFile);
    sweep->add_option("--truth", sweep_truth, "ground-truth JSON")->check(CLI::ExistingFile);
    sweep->add_option("--test-data", sweep_test, "held-out dataset CSV for loglike/e_h")
        ->check(CLI::ExistingFile);
    sweep->add_option("--out", sweep_out, "output CSV")->required();
    sweep->add_option("--alpha-s-grid", alpha_s_grid, "comma-separated L1 weights")->delimiter(',');
    sweep->add_option("--alpha-g-grid", alpha_g_grid, "comma-separated group weights")->delimiter(',');
    sweep->add_option("--n-grid", n_grid, "comma-separated training sizes (prefix subsets)")->delimiter(',');
    sweep->add_option("--zero-threshold", sweep_zero_threshold, "relative group-norm cutoff for zero pairs")
        ->check(CLI::PositiveNumber);
    sweep_flags.register_options(sweep);
    sweep->callback([&] {
        run_sweep(sweep_data, sweep_truth, sweep_test, sweep_flags, alpha_s_grid, alpha_g_grid, n_grid,
                  sweep_zero_threshold, seed, threads, sweep_out);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

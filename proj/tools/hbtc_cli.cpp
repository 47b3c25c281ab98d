// hbtc: generate harmonic BTD test data, complete tensors, evaluate, and run sweeps.
//
// Exit codes: 0 success, 2 malformed configuration/arguments/files, 3 numerical abort.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hbtc/admm.hpp"
#include "hbtc/config.hpp"
#include "hbtc/io.hpp"
#include "hbtc/sweep.hpp"
#include "hbtc/synth.hpp"

namespace fs = std::filesystem;
using namespace hbtc;

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> backend;
    std::optional<double> lambda;
    std::optional<double> beta0;
    std::optional<double> rho;
    std::optional<std::uint64_t> iters;

    void attach(CLI::App* cmd) {
        cmd->add_option("--seed", seed, "Random seed");
        cmd->add_option("--backend", backend, "Factor update backend")->check(CLI::IsMember({"als", "gn"}));
        cmd->add_option("--lambda", lambda, "Data-fit weight");
        cmd->add_option("--beta0", beta0, "Initial ADMM penalty");
        cmd->add_option("--rho", rho, "Penalty growth factor in (1, 1.1]");
        cmd->add_option("--iters", iters, "Maximum ADMM iterations");
    }

    void apply(KeyValueConfig& kv) const {
        const auto num = [](double v) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return std::string(buf);
        };
        if (seed) kv.set("seed", std::to_string(*seed));
        if (backend) kv.set("backend", *backend);
        if (lambda) kv.set("lambda", num(*lambda));
        if (beta0) kv.set("beta0", num(*beta0));
        if (rho) kv.set("rho_penalty", num(*rho));
        if (iters) kv.set("max_iterations", std::to_string(*iters));
    }
};

KeyValueConfig load_config(const std::string& path, const Overrides& ov) {
    KeyValueConfig kv = path.empty() ? KeyValueConfig{} : KeyValueConfig::load(path);
    ov.apply(kv);
    return kv;
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw FormatError("cannot create output directory " + dir.string() + ": " + ec.message());
}

int cmd_gen(const std::string& config, const fs::path& out, const Overrides& ov) {
    const GenConfig gen = gen_config_from(load_config(config, ov));
    ensure_dir(out);
    const GroundTruth gt = generate(gen);
    io::save_tensor(out / "clean.ct3", gt.clean);
    io::save_tensor(out / "noisy.ct3", gt.noisy);
    io::save_mask(out / "mask.cm3", gt.mask);
    io::save_factors(out / "truth.btd1", gt.factors);
    std::cout << "wrote " << (out / "clean.ct3").string() << ", noisy.ct3, mask.cm3, truth.btd1 ("
              << gt.mask.observed_count() << " observed entries)\n";
    return 0;
}

int cmd_complete(const std::string& config, const fs::path& data, const fs::path& mask_path, const fs::path& init,
                 const fs::path& out, const Overrides& ov) {
    const KeyValueConfig kv = load_config(config, ov);
    SolverConfig solver = solver_config_from(kv);
    const auto blocks = kv.get_uints("blocks", {3, 3, 3});
    const BlockStructure structure(std::vector<std::size_t>(blocks.begin(), blocks.end()));
    const ComplexTensor3 y = io::load_tensor(data);
    const ObservationMask w = io::load_mask(mask_path);
    if (!(y.dims() == w.dims())) throw ShapeError("data and mask dimensions differ");

    std::optional<BtdFactors> initial;
    if (!init.empty()) {
        initial = io::load_factors(init);
        solver.init = InitMode::Provided;
    }
    const SolveReport rep = solve(y, w, structure, solver, initial);

    ensure_dir(out);
    io::save_tensor(out / "completed.ct3", rep.completed);
    io::save_factors(out / "factors.btd1", rep.factors);
    std::ofstream trace(out / "trace.csv");
    write_trace_csv(trace, rep.trace);
    if (!trace) throw FormatError("cannot write trace.csv");
    std::cout << "iterations " << rep.iterations_run << (rep.converged ? " (converged)" : "") << '\n';
    return 0;
}

int cmd_eval(const fs::path& estimate, const fs::path& clean) {
    const double e = rlne(io::load_tensor(estimate), io::load_tensor(clean));
    std::printf("%.6f\n", e);
    return 0;
}

int cmd_sweep(const std::string& config, const fs::path& out, std::size_t threads, const Overrides& ov) {
    const SweepSpec spec = sweep_spec_from(load_config(config, ov));
    const SweepResult res = run_sweep(spec, threads);
    ensure_dir(out);
    std::ofstream rows(out / "rows.csv");
    write_rows_csv(rows, res.rows);
    std::ofstream aggs(out / "aggregates.csv");
    write_aggregates_csv(aggs, res.aggregates);
    if (!rows || !aggs) throw FormatError("cannot write sweep CSVs");
    write_aggregates_csv(std::cout, res.aggregates);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Harmonic block-term tensor completion"};
    app.require_subcommand(1);

    std::string config;
    std::string out = ".";
    std::size_t threads = 0;
    std::string data, mask, init, estimate, clean;
    Overrides ov;

    auto* gen = app.add_subcommand("gen", "Write ground-truth tensors, mask and factors");
    gen->add_option("--config", config, "Configuration file");
    gen->add_option("--out", out, "Output directory");
    ov.attach(gen);

    auto* complete = app.add_subcommand("complete", "Complete a partially observed tensor");
    complete->add_option("--config", config, "Configuration file");
    complete->add_option("--data", data, "Observed tensor (CT3)")->required();
    complete->add_option("--mask", mask, "Observation mask (CM3)")->required();
    complete->add_option("--init-factors", init, "Initial factors (BTD1)");
    complete->add_option("--out", out, "Output directory");
    ov.attach(complete);

    auto* eval = app.add_subcommand("eval", "Print the RLNE of an estimate against a clean tensor");
    eval->add_option("estimate", estimate, "Estimated tensor (CT3)")->required();
    eval->add_option("clean", clean, "Reference tensor (CT3)")->required();

    auto* sweep = app.add_subcommand("sweep", "Run a Monte-Carlo sweep");
    sweep->add_option("--config", config, "Sweep configuration file");
    sweep->add_option("--out", out, "Output directory");
    sweep->add_option("--threads", threads, "Worker threads (default: HBTC_THREADS or core count)");
    ov.attach(sweep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*gen) return cmd_gen(config, out, ov);
        if (*complete) return cmd_complete(config, data, mask, init, out, ov);
        if (*eval) return cmd_eval(estimate, clean);
        if (*sweep) return cmd_sweep(config, out, threads, ov);
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}

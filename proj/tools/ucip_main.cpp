// ucip: command-line front end for trajectory generation, QBM training and the
// batch experiment harness. Exit codes: 0 success, 1 error, 2 envelope-withheld
// classification, 64 unknown subcommand.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ucip/errors.hpp"
#include "ucip/harness.hpp"
#include "ucip/qbm.hpp"
#include "ucip/report.hpp"
#include "ucip/trajgen.hpp"

namespace {

namespace fs = std::filesystem;

struct GlobalOpts {
    std::string config_path;
    std::string out_dir = "runs/out";
    std::string format = "json";
    std::uint64_t seed = 42;
    bool seed_given = false;
};

ucip::harness::ExperimentConfig load_config(const GlobalOpts& g, const std::string& experiment) {
    ucip::harness::ExperimentConfig cfg;
    if (!g.config_path.empty())
        cfg = ucip::harness::ExperimentConfig::from_json_string(ucip::report::read_file(g.config_path));
    cfg.experiment = experiment;
    cfg.out_dir = g.out_dir;
    if (g.seed_given || g.config_path.empty()) {
        cfg.master_seed = g.seed;
        cfg.train.seed = g.seed;
    }
    return cfg;
}

int run_experiments(const GlobalOpts& g, const std::vector<std::string>& experiments) {
    int exit_code = 0;
    for (const auto& id : experiments) {
        const auto cfg = load_config(g, id);
        const auto outcome = ucip::harness::run(cfg);
        for (const auto& f : outcome.files)
            std::cout << id << ": wrote " << (fs::path(cfg.out_dir) / f).string() << "\n";
        if (outcome.envelope_withheld) {
            std::cout << id << ": safety envelope not met, classification withheld (exit 2)\n";
            exit_code = 2;
        }
    }
    return exit_code;
}

int cmd_generate(const GlobalOpts& g, const std::string& classes_arg, int n, int grid, int horizon) {
    std::vector<ucip::trajgen::AgentClass> classes;
    std::string token;
    for (char ch : classes_arg + ",") {
        if (ch == ',') {
            if (!token.empty()) classes.push_back(ucip::trajgen::class_from_name(token));
            token.clear();
        } else {
            token += ch;
        }
    }
    if (classes.empty()) throw ucip::ConfigError("generate: no classes given");

    auto cfg = load_config(g, "phase1");
    cfg.grid_size = grid;
    cfg.horizon = horizon;
    const auto dataset = ucip::harness::build_dataset(cfg, classes, n);

    const fs::path out(g.out_dir);
    if (g.format == "csv") {
        ucip::report::write_file(out / "dataset.csv", ucip::trajgen::dataset_to_csv(dataset));
        std::cout << "generate: wrote " << (out / "dataset.csv").string() << "\n";
    } else {
        ucip::report::write_file(out / "dataset.json", ucip::trajgen::dataset_to_json(dataset) + "\n");
        std::cout << "generate: wrote " << (out / "dataset.json").string() << "\n";
    }
    return 0;
}

int cmd_train(const GlobalOpts& g, const std::string& input) {
    const auto dataset = ucip::trajgen::dataset_from_json(ucip::report::read_file(input));
    const auto cfg = load_config(g, "phase1");
    const auto model = ucip::qbm::train(dataset, cfg.qbm, cfg.train);
    const fs::path out(g.out_dir);
    ucip::report::write_file(out / "model.json", model.to_json() + "\n");
    std::cout << "train: final reconstruction loss " << model.train_meta.final_loss << "\n";
    std::cout << "train: wrote " << (out / "model.json").string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"UCIP: entanglement-based detection of terminal continuation objectives"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOpts g;
    app.add_option("--config", g.config_path, "JSON experiment config (defaults are built in)");
    app.add_option("--out", g.out_dir, "output directory")->capture_default_str();
    app.add_option("--format", g.format, "dataset output format for generate")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    auto* seed_opt = app.add_option("--seed", g.seed, "master seed")->capture_default_str();

    std::string gen_classes = "type_a,type_b,random";
    int gen_n = 30, gen_grid = 10, gen_horizon = 100;
    auto* generate = app.add_subcommand("generate", "generate a labeled trajectory dataset");
    generate->add_option("--classes", gen_classes, "comma-separated agent classes")->capture_default_str();
    generate->add_option("--n", gen_n, "trajectories per class")->capture_default_str();
    generate->add_option("--grid", gen_grid, "grid size")->capture_default_str();
    generate->add_option("--horizon", gen_horizon, "timesteps per trajectory")->capture_default_str();

    std::string train_input = "dataset.json";
    auto* train = app.add_subcommand("train", "train the shared QBM on a dataset file");
    train->add_option("--in", train_input, "dataset JSON file")->capture_default_str();

    app.add_subcommand("phase1", "core detection run: gate, gap, permutation test, envelope");
    app.add_subcommand("temporal", "EPS/PRI window sweep");
    app.add_subcommand("counterfactual", "counterfactual divergence diagnostics");
    app.add_subcommand("cross-agent", "cross-latent predictability and ECI");
    app.add_subcommand("adversarial", "mimicry/high-entropy/cyclic false-positive rates");
    app.add_subcommand("baselines", "classical baseline comparison");
    app.add_subcommand("sweep-dim", "hidden-dimensionality sweep");
    app.add_subcommand("sweep-grid", "grid-size and memory-length scalability sweeps");
    app.add_subcommand("sweep-alpha", "continuation-weight interpolation sweep");
    app.add_subcommand("transfer", "zero-shot corridor transfer");

    std::string report_dir;
    auto* report_cmd = app.add_subcommand("report", "print a text summary of a finished run");
    report_cmd->add_option("dir", report_dir, "run directory")->required();

    // Contract: an unknown subcommand exits 64 with a usage message.
    if (argc > 1 && argv[1][0] != '-' && app.get_subcommand_no_throw(argv[1]) == nullptr) {
        std::cerr << "unknown subcommand: " << argv[1] << "\n" << app.help();
        return 64;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "ExtrasError") {
            std::cerr << e.what() << "\n" << app.help();
            return 64;
        }
        return app.exit(e);
    }

    g.seed_given = seed_opt->count() > 0;

    try {
        if (generate->parsed()) return cmd_generate(g, gen_classes, gen_n, gen_grid, gen_horizon);
        if (train->parsed()) return cmd_train(g, train_input);
        if (report_cmd->parsed()) {
            std::cout << ucip::harness::render_report(report_dir);
            return 0;
        }
        const std::string sub = app.get_subcommands().front()->get_name();
        if (sub == "phase1") return run_experiments(g, {"phase1"});
        if (sub == "temporal") return run_experiments(g, {"temporal"});
        if (sub == "counterfactual") return run_experiments(g, {"counterfactual"});
        if (sub == "cross-agent") return run_experiments(g, {"cross_agent"});
        if (sub == "adversarial") return run_experiments(g, {"adversarial"});
        if (sub == "baselines") return run_experiments(g, {"baselines"});
        if (sub == "sweep-dim") return run_experiments(g, {"dim_sweep"});
        if (sub == "sweep-grid") return run_experiments(g, {"grid_sweep", "memory_sweep"});
        if (sub == "sweep-alpha") return run_experiments(g, {"alpha_sweep"});
        if (sub == "transfer") return run_experiments(g, {"transfer"});
        std::cerr << "unknown subcommand\n";
        return 64;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

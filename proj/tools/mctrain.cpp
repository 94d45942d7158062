// mctrain: prepare data, train, sweep epsilon, verify stability results, report.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "mct/error.hpp"
#include "mct/exp/commands.hpp"
#include "mct/text.hpp"

namespace {

using namespace mct;

struct Overrides {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<std::string> data_dir;
    std::optional<std::size_t> sample_count;
    std::optional<std::size_t> epochs;
    std::optional<std::size_t> batch_size;
    std::optional<double> lr;
    std::optional<std::string> arch;
    std::optional<std::string> metric;
    std::optional<std::size_t> threads;
    std::vector<double> epsilons;
    std::vector<std::uint64_t> seeds;
};

exp::ExperimentConfig resolve(const Overrides& o) {
    exp::ExperimentConfig c = o.config.empty() ? exp::ExperimentConfig{} : exp::load_config(o.config);
    // data dir: flag, then environment, then file
    if (o.data_dir) {
        c.data_dir = *o.data_dir;
    } else if (const char* env = std::getenv(exp::kDataDirEnv); env && *env) {
        c.data_dir = env;
    }
    if (o.seed) c.seed = *o.seed;
    if (o.out_dir) c.out_dir = *o.out_dir;
    if (o.sample_count) c.sample_count = *o.sample_count;
    if (o.epochs) c.epochs = *o.epochs;
    if (o.batch_size) c.batch_size = *o.batch_size;
    if (o.lr) c.learning_rate = *o.lr;
    if (o.arch) c.arch = nn::parse_architecture(*o.arch);
    if (o.metric) c.metric = dfe::parse_metric(*o.metric);
    if (o.threads) c.threads = *o.threads;
    if (!o.epsilons.empty()) c.epsilons = o.epsilons;
    if (!o.seeds.empty()) c.seeds = o.seeds;
    c.validate();
    return c;
}

void print_run(const exp::RunResult& r) {
    std::cout << "epsilon " << format_double(r.epsilon) << ", seed " << r.seed << ": train "
              << format_fixed(r.train_accuracy, 4) << ", validation " << format_fixed(r.validation_accuracy, 4)
              << ", loss " << format_fixed(r.final_loss, 6) << " (" << format_fixed(r.seconds, 1) << " s)\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-dataset training with epsilon-perturbed scalarization"};
    app.require_subcommand(1);
    app.fallthrough();
    Overrides o;
    app.add_option("--config", o.config, "TOML experiment config")->check(CLI::ExistingFile);
    app.add_option("--seed", o.seed, "master seed");
    app.add_option("--out-dir", o.out_dir, "output directory");
    app.add_option("--data-dir", o.data_dir, std::string("directory with the IDX files (env ") + exp::kDataDirEnv + ")");
    app.add_option("--sample-count", o.sample_count, "use only this many samples");
    app.add_option("--epochs", o.epochs, "training epochs");
    app.add_option("--batch-size", o.batch_size, "rows per dataset per step");
    app.add_option("--lr", o.lr, "learning rate");
    app.add_option("--arch", o.arch, "mlp | residual");
    app.add_option("--metric", o.metric, "bce | squared-error | logistic");

    auto* prepare = app.add_subcommand("prepare", "split, noise and store the datasets");

    auto* train = app.add_subcommand("train", "one training run on prepared data");
    double epsilon = 0.0;
    train->add_option("--epsilon", epsilon, "weight perturbation (0 = benchmark)");

    auto* sweep = app.add_subcommand("sweep", "train for epsilon = 0 and every grid value");
    sweep->add_option("--epsilons", o.epsilons, "epsilon grid")->delimiter(',');
    sweep->add_option("--seeds", o.seeds, "seed list")->delimiter(',');
    sweep->add_option("--threads", o.threads, "parallel training runs");

    auto* verify = app.add_subcommand("verify", "randomized checks of the stability results");
    std::string suite;
    std::size_t trials = 1000;
    verify->add_option("--suite", suite, "prop1 | prop2 | estimation | convergence | scalarization | gradient")
        ->required();
    verify->add_option("--trials", trials, "number of random instances");

    auto* report = app.add_subcommand("report", "benchmark vs best-training epsilon table");
    std::string sweep_csv;
    report->add_option("--sweep", sweep_csv, "sweep CSV (default <out-dir>/sweep.csv)");

    CLI11_PARSE(app, argc, argv);

    try {
        const auto config = resolve(o);
        if (prepare->parsed()) {
            const auto data = exp::cmd_prepare(config);
            for (const auto& p : data.parts)
                std::cout << p.name << ": " << p.size() << " samples, sigma " << format_double(p.source_sigma) << '\n';
            std::cout << "validation: " << data.validation.size() << " samples\n";
            std::cout << "wrote " << (config.out_dir / "prepared").string() << '\n';
        } else if (train->parsed()) {
            print_run(exp::cmd_train(config, epsilon));
        } else if (sweep->parsed()) {
            const auto result = exp::cmd_sweep(config);
            int failed = 0;
            for (const auto& r : result.rows) {
                if (r.ok) {
                    print_run(r);
                } else {
                    ++failed;
                    std::cout << "epsilon " << format_double(r.epsilon) << ", seed " << r.seed << ": FAILED: " << r.error
                              << '\n';
                }
            }
            std::cout << "wrote " << (config.out_dir / "sweep.csv").string() << '\n';
            return failed == 0 ? 0 : 1;
        } else if (verify->parsed()) {
            const auto result = exp::cmd_verify(suite, trials, config.seed, config.out_dir);
            std::cout << result.summary;
            return result.exit_code();
        } else if (report->parsed()) {
            const std::filesystem::path csv = sweep_csv.empty() ? config.out_dir / "sweep.csv" : std::filesystem::path(sweep_csv);
            const auto r = exp::cmd_report(csv);
            const auto md = csv.parent_path() / "report.md";
            std::ofstream(md) << "# Accuracy on the training and validation sets\n\n" << r.table;
            std::cout << r.table;
        }
    } catch (const ArgumentError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

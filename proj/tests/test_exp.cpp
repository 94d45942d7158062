#include <doctest.h>

#include <fstream>
#include <regex>
#include <sstream>

#include "mct/data/idx.hpp"
#include "mct/error.hpp"
#include "mct/exp/commands.hpp"
#include "mct/exp/config.hpp"
#include "mct/exp/svg.hpp"
#include "mct/nn/train.hpp"
#include "mct/rng.hpp"
#include "test_util.hpp"

using namespace mct;
using namespace mct::exp;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t count(const std::string& text, const std::string& needle) {
    std::size_t n = 0;
    for (auto at = text.find(needle); at != std::string::npos; at = text.find(needle, at + 1)) ++n;
    return n;
}

// Class c lights up pixel c of a 4x4 image, plus noise.
void write_fake_digits(const fs::path& dir, std::size_t n) {
    data::RawDataset raw;
    raw.count = n;
    raw.rows = 4;
    raw.cols = 4;
    Xoshiro256 rng(1);
    for (std::size_t i = 0; i < n; ++i) {
        const auto label = static_cast<std::uint8_t>(i % 10);
        raw.labels.push_back(label);
        for (std::size_t p = 0; p < 16; ++p)
            raw.pixels.push_back(p == label ? 255 : static_cast<std::uint8_t>(rng.below(40)));
    }
    data::save_idx(raw, dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte");
}

ExperimentConfig small_config(const test::TempDir& dir) {
    ExperimentConfig c;
    c.data_dir = dir.path();
    c.out_dir = dir / "out";
    c.hidden = {8};
    c.epochs = 3;
    c.epsilons = {0.001, 0.0055, 0.01};
    return c;
}

}  // namespace

TEST_CASE("config parses every section") {
    const auto c = parse_config(R"(
seed = 7
out_dir = "runs"
[data]
dir = "/data/mnist"
sample_count = 1200
validation_fraction = 0.25
crop20 = true
[split]
parts = 3
sigmas = [0, 0.05, 0.3]
[train]
arch = "residual"
hidden = [32, 32]
shortcut = "post"
metric = "squared-error"
epochs = 4
batch_size = 5
learning_rate = 0.02
[sweep]
epsilons = [0.002, 0.004]
seeds = [1, 2, 3]
threads = 2
)");
    CHECK(c.seed == 7);
    CHECK(c.out_dir == "runs");
    CHECK(c.data_dir == "/data/mnist");
    CHECK(c.sample_count == 1200u);
    CHECK(c.validation_fraction == 0.25);
    CHECK(c.crop20);
    CHECK(c.sigmas == std::vector<double>{0, 0.05, 0.3});
    CHECK(c.arch == nn::Architecture::residual);
    CHECK(c.hidden == std::vector<std::size_t>{32, 32});
    CHECK(c.shortcut_mode == nn::ShortcutMode::post_activation);
    CHECK(c.metric == dfe::Metric::squared_error);
    CHECK(c.epochs == 4);
    CHECK(c.batch_size == 5);
    CHECK(c.effective_learning_rate() == 0.02);
    CHECK(c.epsilons == std::vector<double>{0.002, 0.004});
    CHECK(c.effective_seeds() == std::vector<std::uint64_t>{1, 2, 3});
    CHECK(c.threads == 2);
    CHECK(c.layer_dims(400, 10) == std::vector<std::size_t>{400, 32, 32, 10});
}

TEST_CASE("config defaults") {
    const auto c = parse_config("");
    CHECK(c.parts == 3);
    CHECK(c.epochs == 30);
    CHECK(c.effective_learning_rate() == 0.1);
    CHECK(c.epsilons.size() == 10);
    CHECK(c.epsilons.front() == 0.001);
    CHECK(c.epsilons.back() == 0.01);
    CHECK(c.effective_seeds() == std::vector<std::uint64_t>{42});
    CHECK(c.layer_dims(784, 10) == std::vector<std::size_t>{784, 25, 10});
    auto r = c;
    r.arch = nn::Architecture::residual;
    CHECK(r.effective_learning_rate() == 0.05);
    CHECK(r.layer_dims(400, 10) == std::vector<std::size_t>{400, 64, 64, 10});
}

TEST_CASE("config rejects bad values") {
    CHECK_THROWS_AS(parse_config("[data]\nvalidation_fraction = 1.0"), ArgumentError);
    CHECK_THROWS_AS(parse_config("[data]\nvalidation_fraction = 0"), ArgumentError);
    CHECK_THROWS_AS(parse_config("[split]\nsigmas = [0, 0.1]"), ArgumentError);
    CHECK_THROWS_AS(parse_config("[sweep]\nepsilons = [0.9]"), ArgumentError);
    CHECK_THROWS_AS(parse_config("[train]\nlearning_rate = -1"), ArgumentError);
    CHECK_THROWS_AS(parse_config("[train]\narch = \"cnn\""), ArgumentError);
    CHECK_THROWS_AS(parse_config("[train]\nepochs = \"ten\""), ArgumentError);
    CHECK_THROWS_AS(parse_config("[train]\nmomentum = 0.9"), ArgumentError);
    CHECK_THROWS_AS(parse_config("[train]\narch = \"residual\"\nhidden = [8, 4]"), ArgumentError);
    CHECK_THROWS_AS(parse_config("seed = "), ArgumentError);
}

TEST_CASE("config round trips through toml") {
    ExperimentConfig c;
    c.sample_count = 900;
    c.sigmas = {0.0, 0.125, 0.5};
    c.learning_rate = 0.3;
    c.seeds = {4, 5};
    c.hidden = {12};
    c.validation_fraction = 0.1;
    const auto back = parse_config(to_toml(c));
    CHECK(to_toml(back) == to_toml(c));
    CHECK(back.sigmas == c.sigmas);
    CHECK(back.learning_rate == c.learning_rate);
    CHECK(back.sample_count == c.sample_count);
}

TEST_CASE("svg chart contract") {
    LineChart chart{"t", "x", "y", {{"a", "red", {0, 1, 2}, {1, 2, 3}}, {"b & c", "blue", {0, 2}, {2, 2}}}};
    const auto svg = render_svg(chart);
    CHECK(svg.find("width=\"800\" height=\"600\"") != std::string::npos);
    CHECK(svg.find("version=\"1.1\"") != std::string::npos);
    CHECK(count(svg, "<polyline") == 2);
    CHECK(svg.find("b &amp; c") != std::string::npos);
    CHECK(svg.find("b & c") == std::string::npos);
}

TEST_CASE("prepare splits, noises and records a manifest") {
    test::TempDir dir;
    write_fake_digits(dir.path(), 10000);
    auto c = small_config(dir);
    const auto data = cmd_prepare(c);
    REQUIRE(data.parts.size() == 3);
    CHECK(data.validation.size() == 2000);
    std::size_t train = 0;
    for (const auto& p : data.parts) train += p.size();
    CHECK(train == 8000);
    CHECK(data.parts[0].size() == 2667);
    CHECK(data.parts[2].size() == 2666);

    const auto manifest = slurp(c.out_dir / "prepared" / "manifest.json");
    CHECK(manifest.find("\"source_sigma\": 0.1") != std::string::npos);
    CHECK(manifest.find("\"source_sigma\": 0.2") != std::string::npos);

    // the validation split is clean: every entry is an exact multiple of 1/255
    const RowMatrix scaled = data.validation.inputs * 255.0;
    CHECK((scaled.array() - scaled.array().round()).abs().maxCoeff() < 1e-9);

    // same seeds, same bytes
    const auto again_dir = dir / "again";
    c.out_dir = again_dir;
    cmd_prepare(c);
    CHECK(slurp(again_dir / "prepared" / "manifest.json") == manifest);

    const auto loaded = load_prepared(dir / "out");
    CHECK(loaded.parts[1].inputs == data.parts[1].inputs);
    CHECK(loaded.validation.targets == data.validation.targets);
}

TEST_CASE("load_prepared detects tampering") {
    test::TempDir dir;
    write_fake_digits(dir.path(), 300);
    const auto c = small_config(dir);
    cmd_prepare(c);
    {
        std::fstream f(c.out_dir / "prepared" / "gamma2-inputs.idx", std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(40);
        f.put('\x7f');
    }
    CHECK_THROWS_AS(load_prepared(c.out_dir), ConsistencyError);
    CHECK_THROWS_AS(load_prepared(dir / "nowhere"), IoError);
}

TEST_CASE("prepare propagates dataset errors") {
    test::TempDir dir;
    auto c = small_config(dir);
    CHECK_THROWS_AS(cmd_prepare(c), IoError);
    write_fake_digits(dir.path(), 300);
    c.sample_count = 301;
    CHECK_THROWS_AS(cmd_prepare(c), ArgumentError);
}

TEST_CASE("train writes artifacts and is reproducible") {
    test::TempDir dir;
    write_fake_digits(dir.path(), 600);
    auto c = small_config(dir);
    cmd_prepare(c);
    const auto r = cmd_train(c, 0.005);
    CHECK(r.ok);
    CHECK(r.part_accuracy.size() == 3);
    const auto run = c.out_dir / "runs" / "eps_0.005_seed_42";
    const auto first = slurp(run / "checkpoint.txt");
    CHECK(fs::exists(run / "history.csv"));
    CHECK(fs::exists(run / "summary.json"));
    cmd_train(c, 0.005);
    CHECK(slurp(run / "checkpoint.txt") == first);
    CHECK(nn::load_checkpoint(run / "checkpoint.txt").parameter_count() == 16 * 8 + 8 + 8 * 10 + 10);

    CHECK(cmd_train(c, 0.0).ok);
    try {
        cmd_train(c, 0.9);
        FAIL("expected ArgumentError");
    } catch (const ArgumentError& e) {
        CHECK(std::string(e.what()).find("positive") != std::string::npos);
    }
}

TEST_CASE("sweep rows, files and report") {
    test::TempDir dir;
    write_fake_digits(dir.path(), 600);
    auto c = small_config(dir);
    c.seeds = {3, 1};
    cmd_prepare(c);
    const auto sweep = cmd_sweep(c);
    REQUIRE(sweep.rows.size() == 8);
    CHECK(sweep.rows[0].epsilon == 0.0);
    CHECK(sweep.rows[0].seed == 1);
    CHECK(sweep.rows[1].seed == 3);
    CHECK(sweep.rows[7].epsilon == 0.01);
    for (const auto& r : sweep.rows) CHECK(r.ok);

    const auto csv = slurp(c.out_dir / "sweep.csv");
    CHECK(csv.rfind(std::string(kSweepHeader) + "\n", 0) == 0);
    CHECK(count(csv, "\n") == 9);
    CHECK(count(csv, "\n0,") == 2);
    for (const char* svg : {"sweep_train.svg", "sweep_val.svg"}) CHECK(count(slurp(c.out_dir / svg), "<polyline") == 2);
    CHECK(fs::exists(c.out_dir / "sweep_summary.csv"));
    CHECK(fs::exists(c.out_dir / "timings.csv"));

    const auto report = cmd_report(c.out_dir / "sweep.csv");
    CHECK(report.benchmark.epsilon == 0.0);
    CHECK(report.benchmark.seeds == 2);
    CHECK(report.best.train >= report.benchmark.train);
    CHECK(count(report.table, "\n| ") == 2);

    // a threaded rerun writes the same bytes
    c.threads = 3;
    cmd_sweep(c);
    CHECK(slurp(c.out_dir / "sweep.csv") == csv);
}

TEST_CASE("report selection rules") {
    test::TempDir dir;
    const auto write = [&](const std::string& body) {
        std::ofstream(dir / "s.csv") << kSweepHeader << '\n' << body;
        return dir / "s.csv";
    };
    const auto single = cmd_report(write("0,1,mlp,0.9,0.8,0.1\n"));
    CHECK(single.best.epsilon == single.benchmark.epsilon);
    CHECK(single.best.train == single.benchmark.train);
    const auto lines = single.table.substr(0, single.table.find("\n\n"));
    CHECK(count(lines, "| 0 | 0.9000 | 0.8000 | 1 |") == 2);

    const auto tie = cmd_report(write("0,1,mlp,0.9,0.8,0.1\n0.01,1,mlp,0.95,0.7,0.1\n0.002,1,mlp,0.95,0.9,0.1\n"));
    CHECK(tie.best.epsilon == 0.002);
    CHECK(tie.best.validation == 0.9);

    const auto failed = cmd_report(write("0,1,mlp,0.9,0.8,0.1\n0.01,1,mlp,nan,nan,nan\n"));
    CHECK(failed.best.epsilon == 0.0);

    CHECK_THROWS_AS(cmd_report(write("0.01,1,mlp,0.95,0.7,0.1\n")), DataError);
    {
        std::ofstream(dir / "bad.csv") << "eps,acc\n";
    }
    CHECK_THROWS_AS(cmd_report(dir / "bad.csv"), FormatError);
}

TEST_CASE("verify suites write csv and exit cleanly") {
    test::TempDir dir;
    for (const auto& name : suite_names()) {
        CAPTURE(name);
        const auto r = cmd_verify(name, 20, 1, dir.path());
        CHECK(r.exit_code() == 0);
        CHECK(r.uncertified == 0);
        CHECK(fs::exists(dir / ("verify_" + name + ".csv")));
    }
    CHECK(slurp(dir / "verify_prop1.csv").find("false") == std::string::npos);
    CHECK_THROWS_AS(cmd_verify("prop3", 10, 1, dir.path()), ArgumentError);
    CHECK_THROWS_AS(cmd_verify("prop1", 0, 1, dir.path()), ArgumentError);
}

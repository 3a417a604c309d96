// tabsynth command-line interface: preprocess, train, sample, grid, report, viz.
//
// Exit codes: 0 success, 1 unexpected failure, 2 usage error, and one code per
// error kind (10 decode ... 23 io, see include/tabsynth/errors.hpp).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>
#include <json.hpp>

#include "tabsynth/csv.hpp"
#include "tabsynth/models.hpp"
#include "tabsynth/protocol.hpp"
#include "tabsynth/resampling.hpp"
#include "tabsynth/samplers.hpp"
#include "tabsynth/svg.hpp"
#include "tabsynth/tabular.hpp"
#include "tabsynth/viz.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace tabsynth;

namespace {

constexpr const char* kOutEnv = "TABSYNTH_OUT_DIR";

std::string timestamp() {
    return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(std::chrono::system_clock::now())));
}

// Explicit flag, else the environment default, else the working directory.
fs::path out_dir(const std::string& given) {
    if (!given.empty()) return given;
    if (const char* env = std::getenv(kOutEnv); env && *env) return env;
    return ".";
}

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::string file_fingerprint(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream bytes;
    bytes << in.rdbuf();
    return fmt::format("{:016x}", fnv1a(bytes.str()));
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + " is not valid JSON: " + e.what());
    }
}

void write_json(const fs::path& path, const json& j) { svg::write_file(path, j.dump(2) + "\n"); }

struct Manifest {
    json body;

    Manifest(const std::string& command, const std::vector<std::string>& argv) {
        body = {{"format", "tabsynth.manifest"},
                {"version", TABSYNTH_VERSION},
                {"command", command},
                {"argv", argv},
                {"started", timestamp()},
                {"inputs", json::object()}};
    }
    void input(const std::string& key, const fs::path& path) {
        body["inputs"][key] = {{"path", path.string()}, {"fnv1a", file_fingerprint(path)}};
    }
    void write(const fs::path& path) {
        body["finished"] = timestamp();
        write_json(path, body);
    }
};

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> out;
    for (const auto& field : csv::split_line(text)) {
        if (field.empty()) continue;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(field, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != field.size()) throw RatioError("not a ratio: '" + field + "'");
        out.push_back(v);
    }
    return out;
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    for (auto& field : csv::split_line(text))
        if (!field.empty()) out.push_back(field);
    return out;
}

void write_rows_csv(const fs::path& path, const RawTable& table) {
    std::ostringstream out;
    csv::write_row(out, table.header);
    for (const auto& row : table.rows) csv::write_row(out, row);
    svg::write_file(path, out.str());
}

void log_line(const std::string& line) { std::cerr << line << '\n'; }

// ---------------------------------------------------------------------------

struct PreprocessArgs {
    std::string csv, metadata, out, name;
};

void cmd_preprocess(const PreprocessArgs& a, const std::vector<std::string>& argv) {
    Manifest manifest("preprocess", argv);
    manifest.input("csv", a.csv);
    manifest.input("metadata", a.metadata);
    Dataset data = load_raw(fs::path(a.csv), fs::path(a.metadata));
    data.name = a.name.empty() ? fs::path(a.csv).stem().string() : a.name;
    const fs::path dir = out_dir(a.out);
    ensure_dir(dir);
    const fs::path csv_out = dir / (data.name + ".csv");
    const fs::path meta_out = dir / (data.name + ".meta.json");
    save_encoded(data, csv_out, meta_out);
    manifest.body["outputs"] = {csv_out.string(), meta_out.string()};
    manifest.body["summary"] = {{"rows", data.rows()},
                                {"width", data.width()},
                                {"positives", data.count(1)},
                                {"ir", compute_ir(data.labels)}};
    manifest.write(dir / (data.name + ".manifest.json"));
    log_line(fmt::format("encoded {} rows x {} columns -> {}", data.rows(), data.width(), csv_out.string()));
}

// ---------------------------------------------------------------------------

struct TrainArgs {
    std::string data, meta, model = "mv-vae", strategy = "minority", spec, out;
    std::uint64_t seed = 0;
    int epochs = -1;
    int batch_size = -1;
    double validation_fraction = 0.1;
};

void cmd_train(const TrainArgs& a, const std::vector<std::string>& argv) {
    Manifest manifest("train", argv);
    manifest.input("data", a.data);
    manifest.input("meta", a.meta);
    const Dataset data = load_encoded(a.data, a.meta);
    ModelSpec spec;
    if (!a.spec.empty()) {
        manifest.input("spec", a.spec);
        spec = ModelSpec::from_json(read_json(a.spec));
    }
    std::tie(spec.architecture, spec.variant) = parse_model_name(a.model);
    if (a.epochs > 0) spec.training.epochs = a.epochs;
    if (a.batch_size > 0) spec.training.batch_size = a.batch_size;
    const SamplingKind kind = sampling_from_string(a.strategy);
    spec = spec_for(spec, kind);
    spec.validate();
    if (!(a.validation_fraction >= 0.0 && a.validation_fraction < 1.0))
        throw ConfigError(fmt::format("validation fraction {} outside [0, 1)", a.validation_fraction));

    // Deterministic validation hold-out of the rows the strategy trains on.
    std::vector<std::size_t> order(data.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng split_rng(seed_mix(a.seed, "validation"));
    std::shuffle(order.begin(), order.end(), split_rng);
    std::vector<std::size_t> eligible;
    for (std::size_t i : order)
        if (kind != SamplingKind::Minority || data.labels[i] == 1) eligible.push_back(i);
    const auto n_val = static_cast<std::size_t>(std::floor(a.validation_fraction * static_cast<double>(eligible.size())));
    std::vector<std::size_t> val(eligible.begin(), eligible.begin() + static_cast<std::ptrdiff_t>(n_val));
    std::vector<std::size_t> fit(eligible.begin() + static_cast<std::ptrdiff_t>(n_val), eligible.end());
    std::sort(val.begin(), val.end());
    std::sort(fit.begin(), fit.end());
    const TrainingView train_view = training_view(data, kind, fit);
    const TrainingView val_view = training_view(data, kind, val);

    const TrainedGenerator gen = train(spec, train_view, val.empty() ? nullptr : &val_view, a.seed);
    const fs::path out = a.out.empty() ? out_dir("") / fmt::format("{}_{}_{}.model.json", data.name, a.model, a.strategy)
                                       : fs::path(a.out);
    if (out.has_parent_path()) ensure_dir(out.parent_path());
    gen.save(out);
    manifest.body["config"] = {{"spec", gen.spec().to_json()},
                               {"strategy", a.strategy},
                               {"seed", a.seed},
                               {"validation_fraction", a.validation_fraction}};
    manifest.body["outputs"] = {out.string()};
    manifest.write(fs::path(out.string() + ".manifest.json"));
    log_line(fmt::format("trained {} ({}) on {} rows -> {}", a.model, a.strategy, fit.size(), out.string()));
}

// ---------------------------------------------------------------------------

struct SampleArgs {
    std::string model, strategy = "minority", out, meta;
    std::size_t n = 100;
    int label = 1;
    std::uint64_t seed = 0;
    std::size_t draw_limit = 10000;
    bool encoded = false;
};

void cmd_sample(const SampleArgs& a, const std::vector<std::string>& argv) {
    Manifest manifest("sample", argv);
    manifest.input("model", a.model);
    const TrainedGenerator gen = TrainedGenerator::load(a.model);
    SamplingStrategy strategy;
    strategy.kind = sampling_from_string(a.strategy);
    strategy.draw_limit = a.draw_limit;
    check_compatible(gen, strategy.kind);
    Rng rng(seed_mix(a.seed, "sample"));
    const Matrix rows = draw(gen, strategy, a.n, a.label, rng);

    Dataset out;
    out.meta = gen.output_meta();
    if (gen.label_as_variable()) out.meta.pop_back();
    if (!a.meta.empty()) {
        manifest.input("meta", a.meta);
        const json mj = read_json(a.meta);
        out.label_column = mj.value("label", out.label_column);
        out.positive_class = mj.value("positive_class", out.positive_class);
    }
    out.features = rows;
    out.labels.assign(a.n, a.label);
    const fs::path path = a.out.empty() ? out_dir("") / "samples.csv" : fs::path(a.out);
    if (path.has_parent_path()) ensure_dir(path.parent_path());
    if (a.encoded) {
        RawTable table;
        for (std::size_t c = 0; c < out.width(); ++c) table.header.push_back(fmt::format("x{}", c));
        table.header.push_back(out.label_column);
        for (Eigen::Index r = 0; r < rows.rows(); ++r) {
            std::vector<std::string> fields;
            for (Eigen::Index c = 0; c < rows.cols(); ++c) fields.push_back(csv::format_double(rows(r, c)));
            fields.push_back(std::to_string(a.label));
            table.rows.push_back(std::move(fields));
        }
        write_rows_csv(path, table);
    } else {
        write_rows_csv(path, decode(out));
    }
    manifest.body["config"] = {{"strategy", a.strategy}, {"n", a.n},   {"label", a.label},
                               {"seed", a.seed},         {"draw_limit", a.draw_limit}, {"encoded", a.encoded}};
    manifest.body["outputs"] = {path.string()};
    manifest.write(fs::path(path.string() + ".manifest.json"));
    log_line(fmt::format("wrote {} rows -> {}", a.n, path.string()));
}

// ---------------------------------------------------------------------------

struct GridArgs {
    std::string data, meta, config, out, methods, sampling, usr_grid, osr_grid, model_spec;
    std::size_t folds = 10;
    std::uint64_t seed = 0;
    std::size_t draw_limit = 10000;
    int jobs = 1;
    int epochs = -1;
    bool record_timing = false;
    bool quiet = false;
};

void cmd_grid(const GridArgs& a, const CLI::App& sub, const std::vector<std::string>& argv) {
    Manifest manifest("grid", argv);
    protocol::GridConfig config;
    std::string data_path = a.data, meta_path = a.meta;
    if (!a.config.empty()) {
        manifest.input("config", a.config);
        json j = read_json(a.config);
        // A previous run's manifest replays its resolved configuration and inputs.
        if (j.value("format", std::string()) == "tabsynth.manifest") {
            if (data_path.empty() && j.at("inputs").contains("data")) data_path = j["inputs"]["data"].value("path", "");
            if (meta_path.empty() && j.at("inputs").contains("meta")) meta_path = j["inputs"]["meta"].value("path", "");
            j = j.at("config");
        }
        config = protocol::GridConfig::from_json(j);
    }
    if (data_path.empty() || meta_path.empty()) throw ConfigError("grid needs --data and --meta (or a manifest to replay)");
    if (!a.model_spec.empty()) {
        manifest.input("model_spec", a.model_spec);
        config.model = ModelSpec::from_json(read_json(a.model_spec));
    }
    // Flags override the configuration file.
    if (sub.count("--methods")) config.methods = split_list(a.methods);
    if (sub.count("--sampling")) {
        config.sampling.clear();
        for (const auto& s : split_list(a.sampling)) config.sampling.push_back(sampling_from_string(s));
    }
    if (sub.count("--usr-grid")) config.usr_grid = parse_grid(a.usr_grid);
    if (sub.count("--osr-grid")) config.osr_grid = parse_grid(a.osr_grid);
    if (sub.count("--folds")) config.folds = a.folds;
    if (sub.count("--seed")) config.seed = a.seed;
    if (sub.count("--draw-limit")) config.draw_limit = a.draw_limit;
    if (sub.count("--jobs")) config.jobs = a.jobs;
    if (sub.count("--record-timing")) config.record_timing = a.record_timing;
    if (a.epochs > 0) config.model.training.epochs = a.epochs;
    config = protocol::GridConfig::from_json(config.to_json());  // validates method names

    manifest.input("data", data_path);
    manifest.input("meta", meta_path);
    const Dataset data = load_encoded(data_path, meta_path);
    const fs::path dir = out_dir(a.out);
    ensure_dir(dir);

    protocol::Logger logger;
    if (!a.quiet) logger = log_line;
    const protocol::GridRun run = protocol::run_grid(data, config, logger);

    protocol::write_results_csv(run.records, dir / "results.csv", config.record_timing);
    const auto summary = protocol::summarize(run.records);
    svg::write_file(dir / "summary.md", protocol::summary_markdown(summary, run.dataset, run.ir));
    protocol::write_summary_csv(summary, dir / "summary.csv");

    json resolved = config.to_json();
    resolved["usr_grid"] = run.usr_grid;
    resolved["osr_grid"] = run.osr_grid;
    manifest.body["config"] = resolved;
    manifest.body["seed"] = config.seed;
    json result = {{"dataset", run.dataset},
                   {"ir", run.ir},
                   {"records", run.records.size()},
                   {"classifier", run.classifier.to_json()},
                   {"warnings", run.warnings}};
    if (run.classifier_search) {
        json scores = json::array();
        for (const auto& s : run.classifier_search->scores)
            scores.push_back({{"config", s.config.to_json()}, {"mean_test_f1", s.mean_test_f1}});
        result["classifier_search"] = scores;
    }
    manifest.body["result"] = result;
    manifest.body["outputs"] = {(dir / "results.csv").string(), (dir / "summary.md").string(),
                                (dir / "summary.csv").string()};
    manifest.write(dir / "manifest.json");
    for (const auto& w : run.warnings) log_line("warning: " + w);
    log_line(fmt::format("{} records -> {}", run.records.size(), (dir / "results.csv").string()));
}

// ---------------------------------------------------------------------------

struct ReportArgs {
    std::string results, out, data, meta, dataset;
    double ir = std::numeric_limits<double>::quiet_NaN();
};

void cmd_report(const ReportArgs& a, const std::vector<std::string>& argv) {
    Manifest manifest("report", argv);
    manifest.input("results", a.results);
    const auto records = protocol::read_results_csv(a.results);
    double ir = a.ir;
    std::string name = a.dataset;
    if (!a.data.empty() && !a.meta.empty()) {
        const Dataset data = load_encoded(a.data, a.meta);
        ir = compute_ir(data.labels);
        if (name.empty()) name = data.name;
    }
    if (name.empty() && !records.empty()) name = records.front().dataset;
    const fs::path dir = out_dir(a.out);
    ensure_dir(dir);
    const auto summary = protocol::summarize(records);
    svg::write_file(dir / "summary.md", protocol::summary_markdown(summary, name, ir));
    protocol::write_summary_csv(summary, dir / "summary.csv");
    manifest.body["outputs"] = {(dir / "summary.md").string(), (dir / "summary.csv").string()};
    manifest.write(dir / "report.manifest.json");
}

// ---------------------------------------------------------------------------

struct VizArgs {
    std::string kind = "heatmap", results, data, meta, model, method, strategy = "minority", out, dataset;
    std::size_t n_real = 200, n_synth = 200;
    std::uint64_t seed = 0;
    double perplexity = 30.0;
    int iterations = 500;
    int jobs = 1;
};

struct Figure {
    fs::path path;
    std::string content;
};

std::vector<Figure> heatmap_figures(const VizArgs& a, const std::string& dataset) {
    const auto records = protocol::read_results_csv(a.results);
    const auto cells = protocol::summarize_cells(records);
    std::set<std::pair<std::string, std::string>> keys;
    for (const auto& c : cells)
        if (c.method != protocol::kBaseline && c.method != protocol::kUndersample) keys.insert({c.method, c.sampling});
    std::vector<std::pair<std::string, std::string>> order(keys.begin(), keys.end());
    std::vector<Figure> figures(order.size());
    const std::string name = dataset.empty() && !records.empty() ? records.front().dataset : dataset;
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, a.jobs))
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(order.size()); ++i) {
        const auto& [method, sampling] = order[static_cast<std::size_t>(i)];
        const std::string title = sampling.empty() ? protocol::display_name(method)
                                                   : protocol::display_name(method) + " (" + sampling + ")";
        svg::Heatmap map = svg::heatmap_for(cells, method, sampling, name + ": " + title);
        double lo = 1.0, hi = 0.0;
        for (const auto& row : map.values)
            for (double v : row)
                if (!std::isnan(v)) lo = std::min(lo, v), hi = std::max(hi, v);
        if (hi >= lo) {
            map.vmin = std::floor(lo * 20.0) / 20.0;
            map.vmax = std::max(map.vmin + 0.05, std::ceil(hi * 20.0) / 20.0);
        }
        figures[static_cast<std::size_t>(i)] = {svg::figure_name(name, method, sampling, "heatmap"), svg::heatmap(map)};
    }
    return figures;
}

std::vector<Figure> embedding_figures(const VizArgs& a, bool pca, bool tsne, bool som) {
    const Dataset data = load_encoded(a.data, a.meta);
    std::string label;
    std::string sampling;
    viz::SyntheticSource source;
    std::optional<TrainedGenerator> gen;
    if (!a.model.empty()) {
        gen = TrainedGenerator::load(a.model);
        SamplingStrategy strategy;
        strategy.kind = sampling_from_string(a.strategy);
        check_compatible(*gen, strategy.kind);
        label = gen->spec().name();
        sampling = a.strategy;
        source = [&gen, strategy](std::size_t n, Rng& rng) { return draw(*gen, strategy, n, 1, rng); };
    } else if (!a.method.empty()) {
        const auto method = resample::method_from_string(a.method);
        label = a.method;
        source = [&data, method](std::size_t n, Rng& rng) {
            return resample::oversample(method, data, n, resample::Params{}, rng).rows;
        };
    } else {
        label = "real";
        source = [&data](std::size_t, Rng&) { return Matrix(0, static_cast<Eigen::Index>(data.width())); };
    }
    const std::size_t n_synth = a.model.empty() && a.method.empty() ? 0 : a.n_synth;
    const viz::TaggedRows tagged = viz::diagnostic_sample(data, source, a.n_real, n_synth, a.seed);
    const std::string name = a.dataset.empty() ? data.name : a.dataset;
    const std::string title = fmt::format("{}: {}{}", name, label, sampling.empty() ? "" : " (" + sampling + ")");

    std::vector<std::string> kinds;
    if (pca) kinds.push_back("pca");
    if (tsne) kinds.push_back("tsne");
    if (som) kinds.push_back("som");
    std::vector<Figure> figures(kinds.size());
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, a.jobs))
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(kinds.size()); ++i) {
        const std::string& kind = kinds[static_cast<std::size_t>(i)];
        std::string content;
        if (kind == "pca") {
            content = svg::scatter(viz::pca2(tagged.rows).coordinates, tagged.tags, title + " PCA");
        } else if (kind == "tsne") {
            viz::TsneConfig cfg;
            cfg.perplexity = a.perplexity;
            cfg.iterations = a.iterations;
            cfg.seed = a.seed;
            content = svg::scatter(viz::tsne2(tagged.rows, cfg, kernels::Exec::Serial).embedding, tagged.tags,
                                   title + " t-SNE");
        } else {
            viz::SomConfig cfg;
            cfg.seed = a.seed;
            viz::SomGrid grid = viz::som_fit(tagged.rows, cfg);
            viz::som_count(grid, tagged.rows, tagged.tags);
            content = svg::som_pies(grid, title + " SOM");
        }
        figures[static_cast<std::size_t>(i)] = {svg::figure_name(name, label, sampling, kind), std::move(content)};
    }
    return figures;
}

void cmd_viz(const VizArgs& a, const std::vector<std::string>& argv) {
    Manifest manifest("viz", argv);
    const bool all = a.kind == "all";
    const bool heat = all || a.kind == "heatmap";
    const bool pca = all || a.kind == "pca", tsne = all || a.kind == "tsne", som = all || a.kind == "som";
    if (!heat && !pca && !tsne && !som) throw ConfigError("unknown figure kind '" + a.kind + "'");
    std::vector<Figure> figures;
    if (heat) {
        if (a.results.empty()) {
            if (!all) throw ConfigError("heatmaps need --results");
        } else {
            manifest.input("results", a.results);
            auto h = heatmap_figures(a, a.dataset);
            figures.insert(figures.end(), h.begin(), h.end());
        }
    }
    if (pca || tsne || som) {
        if (a.data.empty() || a.meta.empty()) {
            if (!all) throw ConfigError("embedding figures need --data and --meta");
        } else {
            manifest.input("data", a.data);
            manifest.input("meta", a.meta);
            if (!a.model.empty()) manifest.input("model", a.model);
            auto e = embedding_figures(a, pca, tsne, som);
            figures.insert(figures.end(), e.begin(), e.end());
        }
    }
    const fs::path dir = out_dir(a.out);
    ensure_dir(dir);
    json outputs = json::array();
    for (const auto& f : figures) {
        svg::write_file(dir / f.path, f.content);
        outputs.push_back((dir / f.path).string());
        log_line("wrote " + (dir / f.path).string());
    }
    manifest.body["config"] = {{"kind", a.kind},   {"n_real", a.n_real},         {"n_synth", a.n_synth},
                               {"seed", a.seed},   {"perplexity", a.perplexity}, {"iterations", a.iterations},
                               {"method", a.method}, {"strategy", a.strategy}};
    manifest.body["outputs"] = outputs;
    manifest.write(dir / "viz.manifest.json");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tabsynth: rebalance imbalanced tabular data with generative models and classic resamplers"};
    app.set_version_flag("--version", std::string(TABSYNTH_VERSION));
    app.require_subcommand(1);
    const std::vector<std::string> args(argv, argv + argc);

    PreprocessArgs pre;
    auto* p = app.add_subcommand("preprocess", "Encode a raw CSV with its metadata");
    p->add_option("--csv", pre.csv, "Raw CSV with a header row")->required()->check(CLI::ExistingFile);
    p->add_option("--metadata", pre.metadata, "Metadata JSON")->required()->check(CLI::ExistingFile);
    p->add_option("--out", pre.out, "Output directory");
    p->add_option("--name", pre.name, "Dataset name (default: CSV stem)");

    TrainArgs tr;
    auto* t = app.add_subcommand("train", "Train a generative model");
    t->add_option("--data", tr.data, "Encoded CSV")->required()->check(CLI::ExistingFile);
    t->add_option("--meta", tr.meta, "Encoded metadata JSON")->required()->check(CLI::ExistingFile);
    t->add_option("--model", tr.model, "Model name, e.g. mv-vae, gan, mv-wgan-gp")->capture_default_str();
    t->add_option("--strategy", tr.strategy, "minority, conditional or rejection")->capture_default_str();
    t->add_option("--spec", tr.spec, "Model spec JSON (sizes, training settings)")->check(CLI::ExistingFile);
    t->add_option("--seed", tr.seed, "Seed")->capture_default_str();
    t->add_option("--epochs", tr.epochs, "Override training epochs");
    t->add_option("--batch-size", tr.batch_size, "Override batch size");
    t->add_option("--validation-fraction", tr.validation_fraction, "Held-out rows for early stopping")->capture_default_str();
    t->add_option("--out", tr.out, "Model file");

    SampleArgs sa;
    auto* s = app.add_subcommand("sample", "Draw synthetic rows from a trained model");
    s->add_option("--model", sa.model, "Model file")->required()->check(CLI::ExistingFile);
    s->add_option("--strategy", sa.strategy, "minority, conditional or rejection")->capture_default_str();
    s->add_option("--n", sa.n, "Rows to emit")->capture_default_str();
    s->add_option("--label", sa.label, "Class of the emitted rows")->capture_default_str()->check(CLI::Range(0, 1));
    s->add_option("--seed", sa.seed, "Seed")->capture_default_str();
    s->add_option("--draw-limit", sa.draw_limit, "Rejection sampling draw limit")->capture_default_str();
    s->add_option("--meta", sa.meta, "Encoded metadata JSON for label naming")->check(CLI::ExistingFile);
    s->add_flag("--encoded", sa.encoded, "Write encoded columns instead of decoded values");
    s->add_option("--out", sa.out, "Output CSV");

    GridArgs gr;
    auto* g = app.add_subcommand("grid", "Run baseline, undersampling and oversampling sweeps");
    g->add_option("--data", gr.data, "Encoded CSV")->check(CLI::ExistingFile);
    g->add_option("--meta", gr.meta, "Encoded metadata JSON")->check(CLI::ExistingFile);
    g->add_option("--config", gr.config, "Grid config JSON or a previous manifest.json")->check(CLI::ExistingFile);
    g->add_option("--model-spec", gr.model_spec, "Template spec for generative methods")->check(CLI::ExistingFile);
    g->add_option("--methods", gr.methods, "Comma separated oversamplers and model names");
    g->add_option("--sampling", gr.sampling, "Comma separated strategies for generative methods");
    g->add_option("--usr-grid", gr.usr_grid, "Comma separated undersampling ratios");
    g->add_option("--osr-grid", gr.osr_grid, "Comma separated oversampling ratios");
    g->add_option("--folds", gr.folds, "Folds")->check(CLI::PositiveNumber);
    g->add_option("--seed", gr.seed, "Master seed");
    g->add_option("--draw-limit", gr.draw_limit, "Rejection sampling draw limit");
    g->add_option("--jobs", gr.jobs, "Parallel jobs")->check(CLI::PositiveNumber);
    g->add_option("--epochs", gr.epochs, "Override generator training epochs");
    g->add_flag("--record-timing", gr.record_timing, "Write wall times into results.csv");
    g->add_flag("--quiet", gr.quiet, "No progress output");
    g->add_option("--out", gr.out, "Output directory");

    ReportArgs re;
    auto* r = app.add_subcommand("report", "Rebuild summary tables from results.csv");
    r->add_option("--results", re.results, "results.csv")->required()->check(CLI::ExistingFile);
    r->add_option("--data", re.data, "Encoded CSV (for the IR)")->check(CLI::ExistingFile);
    r->add_option("--meta", re.meta, "Encoded metadata JSON")->check(CLI::ExistingFile);
    r->add_option("--ir", re.ir, "Imbalance ratio to print");
    r->add_option("--dataset", re.dataset, "Dataset name");
    r->add_option("--out", re.out, "Output directory");

    VizArgs vi;
    auto* v = app.add_subcommand("viz", "Emit heatmaps and PCA / t-SNE / SOM figures");
    v->add_option("--kind", vi.kind, "heatmap, pca, tsne, som or all")->capture_default_str();
    v->add_option("--results", vi.results, "results.csv for heatmaps")->check(CLI::ExistingFile);
    v->add_option("--data", vi.data, "Encoded CSV")->check(CLI::ExistingFile);
    v->add_option("--meta", vi.meta, "Encoded metadata JSON")->check(CLI::ExistingFile);
    v->add_option("--model", vi.model, "Trained model supplying synthetic rows")->check(CLI::ExistingFile);
    v->add_option("--method", vi.method, "Classic oversampler supplying synthetic rows");
    v->add_option("--strategy", vi.strategy, "Sampling strategy for --model")->capture_default_str();
    v->add_option("--n-real", vi.n_real, "Real rows")->capture_default_str();
    v->add_option("--n-synth", vi.n_synth, "Synthetic rows")->capture_default_str();
    v->add_option("--seed", vi.seed, "Seed")->capture_default_str();
    v->add_option("--perplexity", vi.perplexity, "t-SNE perplexity")->capture_default_str();
    v->add_option("--iterations", vi.iterations, "t-SNE iterations")->capture_default_str();
    v->add_option("--jobs", vi.jobs, "Figures rendered in parallel")->check(CLI::PositiveNumber);
    v->add_option("--dataset", vi.dataset, "Dataset name for titles and file names");
    v->add_option("--out", vi.out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*p) cmd_preprocess(pre, args);
        else if (*t) cmd_train(tr, args);
        else if (*s) cmd_sample(sa, args);
        else if (*g) cmd_grid(gr, *g, args);
        else if (*r) cmd_report(re, args);
        else if (*v) cmd_viz(vi, args);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

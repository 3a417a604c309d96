#include "tabsynth/protocol.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "tabsynth/csv.hpp"

namespace tabsynth::protocol {

using nlohmann::json;

namespace {

int method_rank(const std::string& method) {
    if (method == kBaseline) return 0;
    if (method == kUndersample) return 1;
    return 2;
}

std::uint64_t bits(double x) { return std::bit_cast<std::uint64_t>(x); }

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

const char* status_name(Status s) { return s == Status::Ok ? "ok" : "timeout"; }

std::string upper(std::string s) {
    for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

std::string capitalized(std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

std::string format_ratio(double x) { return fmt::format("{:.3g}", x); }

}  // namespace

bool canonical_less(const ExperimentRecord& a, const ExperimentRecord& b) {
    return std::make_tuple(method_rank(a.method), std::cref(a.method), std::cref(a.sampling), a.usr, a.osr, a.fold) <
           std::make_tuple(method_rank(b.method), std::cref(b.method), std::cref(b.sampling), b.usr, b.osr, b.fold);
}

// ---------------------------------------------------------------------------

json GridConfig::to_json() const {
    json sampling_json = json::array();
    for (auto k : sampling) sampling_json.push_back(tabsynth::to_string(k));
    json grid = json::array();
    for (const auto& c : classifier_grid) grid.push_back(c.to_json());
    return {{"methods", methods},
            {"sampling", sampling_json},
            {"usr_grid", usr_grid},
            {"osr_grid", osr_grid},
            {"folds", folds},
            {"validation_fraction", validation_fraction},
            {"seed", seed},
            {"draw_limit", draw_limit},
            {"jobs", jobs},
            {"record_timing", record_timing},
            {"classifier", classifier ? classifier->to_json() : json(nullptr)},
            {"classifier_grid", grid},
            {"model", model.to_json()},
            {"resampling",
             {{"k", resampling.k},
              {"m", resampling.m},
              {"clusters", resampling.clusters},
              {"cluster_threshold", resampling.cluster_threshold},
              {"sparsity_exponent", resampling.sparsity_exponent},
              {"kmeans_iterations", resampling.kmeans_iterations}}}};
}

GridConfig GridConfig::from_json(const json& j) {
    GridConfig c;
    c.methods = j.value("methods", c.methods);
    if (j.contains("sampling")) {
        c.sampling.clear();
        for (const auto& s : j.at("sampling")) c.sampling.push_back(sampling_from_string(s.get<std::string>()));
    }
    c.usr_grid = j.value("usr_grid", c.usr_grid);
    c.osr_grid = j.value("osr_grid", c.osr_grid);
    c.folds = j.value("folds", c.folds);
    c.validation_fraction = j.value("validation_fraction", c.validation_fraction);
    c.seed = j.value("seed", c.seed);
    c.draw_limit = j.value("draw_limit", c.draw_limit);
    c.jobs = j.value("jobs", c.jobs);
    c.record_timing = j.value("record_timing", c.record_timing);
    if (j.contains("classifier") && !j.at("classifier").is_null())
        c.classifier = gbt::BoostConfig::from_json(j.at("classifier"));
    if (j.contains("classifier_grid")) {
        c.classifier_grid.clear();
        for (const auto& g : j.at("classifier_grid")) c.classifier_grid.push_back(gbt::BoostConfig::from_json(g));
    }
    if (j.contains("model")) c.model = ModelSpec::from_json(j.at("model"));
    if (j.contains("resampling")) {
        const auto& r = j.at("resampling");
        c.resampling.k = r.value("k", c.resampling.k);
        c.resampling.m = r.value("m", c.resampling.m);
        c.resampling.clusters = r.value("clusters", c.resampling.clusters);
        c.resampling.cluster_threshold = r.value("cluster_threshold", c.resampling.cluster_threshold);
        c.resampling.sparsity_exponent = r.value("sparsity_exponent", c.resampling.sparsity_exponent);
        c.resampling.kmeans_iterations = r.value("kmeans_iterations", c.resampling.kmeans_iterations);
    }
    for (const auto& m : c.methods)
        if (!resample::is_method_name(m) && !is_model_name(m)) throw ConfigError("unknown method '" + m + "'");
    return c;
}

std::vector<double> default_ratio_grid(double ir) {
    std::vector<double> grid;
    if (ir < 0.01) {
        for (int k = 1; k <= 6; ++k) grid.push_back(std::ldexp(ir, k));
        return grid;
    }
    const int start = static_cast<int>(std::ceil(ir * 10.0 - 1e-9));
    for (int k = std::max(start, 1); k <= 10; ++k) grid.push_back(k / 10.0);
    return grid;
}

void validate_grids(const std::vector<double>& usr_grid, const std::vector<double>& osr_grid, double ir) {
    for (double u : usr_grid)
        if (!std::isfinite(u) || u < ir - 1e-12 || u > 1.0 + 1e-12)
            throw RatioError(fmt::format("usr {} outside [IR={:.6g}, 1]", csv::format_double(u), ir));
    for (double o : osr_grid)
        if (!std::isfinite(o) || o < ir - 1e-12 || o > 1.0 + 1e-12)
            throw RatioError(fmt::format("osr {} outside [IR={:.6g}, 1]", csv::format_double(o), ir));
}

std::uint64_t undersample_seed(std::uint64_t master, const std::string& dataset, std::size_t fold, double usr) {
    return seed_mix(seed_mix(seed_mix(seed_mix(master, dataset), "undersample"), fold), bits(usr));
}

std::uint64_t generator_seed(std::uint64_t master, const std::string& dataset, const std::string& method,
                             const std::string& sampling, std::size_t fold) {
    return seed_mix(seed_mix(seed_mix(seed_mix(seed_mix(master, dataset), "generator"), method), sampling), fold);
}

namespace {

std::uint64_t oversample_seed(std::uint64_t master, const std::string& dataset, const std::string& method,
                              const std::string& sampling, std::size_t fold, double usr, double osr) {
    return seed_mix(seed_mix(seed_mix(generator_seed(master, dataset, method, sampling, fold), "oversample"), bits(usr)),
                    bits(osr));
}

}  // namespace

FoldData fold_data(const Dataset& data, const FoldSplit& folds, std::size_t fold) {
    FoldData f;
    f.fold = fold;
    f.dataset_ir = compute_ir(data.labels);
    const auto train_rows = folds.train_indices(fold);
    f.test_rows = folds.test_indices(fold);
    f.fit_rows = folds.fit_indices(fold);
    f.validation_rows = folds.validation.at(fold);
    f.train = data.subset(train_rows);
    f.test = data.subset(f.test_rows);
    return f;
}

double effective_usr(double usr, double dataset_ir, double fold_ir) {
    if (usr <= dataset_ir + 1e-12) return fold_ir;
    return std::max(usr, fold_ir);
}

double effective_osr(double osr, double usr, double eff_usr) {
    if (osr <= usr + 1e-12) return eff_usr;
    return std::max(osr, eff_usr);
}

ExperimentRecord evaluate(const Dataset& train, const Dataset& test, const gbt::BoostConfig& classifier) {
    const auto model = gbt::fit(train, classifier, kernels::Exec::Serial);
    ExperimentRecord r;
    r.dataset = train.name;
    r.train_f1 = gbt::f1_score(model.predict(train.features), train.labels);
    r.test_f1 = gbt::f1_score(model.predict(test.features), test.labels);
    return r;
}

std::vector<ExperimentRecord> run_baseline(const Dataset& data, const FoldSplit& folds,
                                           const gbt::BoostConfig& classifier) {
    const double ir = compute_ir(data.labels);
    std::vector<ExperimentRecord> out;
    for (std::size_t f = 0; f < folds.fold_count; ++f) {
        const auto start = std::chrono::steady_clock::now();
        const FoldData fd = fold_data(data, folds, f);
        ExperimentRecord r = evaluate(fd.train, fd.test, classifier);
        r.dataset = data.name;
        r.method = kBaseline;
        r.usr = r.osr = ir;
        r.fold = f;
        r.wall_time_ms = elapsed_ms(start);
        out.push_back(std::move(r));
    }
    return out;
}

namespace {

ExperimentRecord undersample_cell(const FoldData& fd, double usr, const gbt::BoostConfig& classifier,
                                  std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    const double eff = effective_usr(usr, fd.dataset_ir, compute_ir(fd.train.labels));
    Rng rng(undersample_seed(seed, fd.train.name, fd.fold, usr));
    ExperimentRecord r = evaluate(resample::random_undersample(fd.train, eff, rng), fd.test, classifier);
    r.method = kUndersample;
    r.usr = r.osr = usr;
    r.fold = fd.fold;
    r.wall_time_ms = elapsed_ms(start);
    return r;
}

}  // namespace

std::vector<ExperimentRecord> run_undersampling_sweep(const Dataset& data, const FoldSplit& folds,
                                                      const std::vector<double>& usr_grid,
                                                      const gbt::BoostConfig& classifier, std::uint64_t seed) {
    validate_grids(usr_grid, {}, compute_ir(data.labels));
    std::vector<ExperimentRecord> out;
    for (std::size_t f = 0; f < folds.fold_count; ++f) {
        const FoldData fd = fold_data(data, folds, f);
        for (double usr : usr_grid) out.push_back(undersample_cell(fd, usr, classifier, seed));
    }
    std::sort(out.begin(), out.end(), canonical_less);
    return out;
}

ExperimentRecord run_oversampling_cell(const FoldData& fd, double usr, double osr, const std::string& method,
                                       const std::string& sampling, const CellSynthesizer& synthesize,
                                       const gbt::BoostConfig& classifier, std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    const std::string& name = fd.train.name;
    const double eff_usr = effective_usr(usr, fd.dataset_ir, compute_ir(fd.train.labels));
    const double eff_osr = effective_osr(osr, usr, eff_usr);
    Rng under_rng(undersample_seed(seed, name, fd.fold, usr));
    Rng over_rng(oversample_seed(seed, name, method, sampling, fd.fold, usr, osr));
    ExperimentRecord r;
    try {
        const Dataset resampled = resample::resample(fd.train, eff_usr, eff_osr, synthesize, under_rng, over_rng);
        r = evaluate(resampled, fd.test, classifier);
    } catch (const DrawLimitExceeded&) {
        r.status = Status::Timeout;
        r.train_f1 = r.test_f1 = std::numeric_limits<double>::quiet_NaN();
    }
    r.dataset = name;
    r.method = method;
    r.sampling = sampling;
    r.usr = usr;
    r.osr = osr;
    r.fold = fd.fold;
    r.wall_time_ms = elapsed_ms(start);
    return r;
}

// ---------------------------------------------------------------------------

namespace {

struct Job {
    enum class Kind { Fold, Classic, Generative } kind;
    std::size_t fold;
    std::string method;
    std::optional<SamplingKind> sampling;
};

struct JobOutput {
    std::vector<ExperimentRecord> records;
    std::vector<std::string> warnings;
    std::vector<std::pair<std::string, std::vector<std::size_t>>> generator_rows;
};

}  // namespace

GridRun run_grid(const Dataset& data, const GridConfig& config, const Logger& log) {
    GridRun run;
    run.dataset = data.name;
    run.ir = compute_ir(data.labels);
    run.usr_grid = config.usr_grid.empty() ? default_ratio_grid(run.ir) : config.usr_grid;
    run.osr_grid = config.osr_grid.empty() ? run.usr_grid : config.osr_grid;
    validate_grids(run.usr_grid, run.osr_grid, run.ir);
    for (const auto& m : config.methods)
        if (!resample::is_method_name(m) && !is_model_name(m)) throw ConfigError("unknown method '" + m + "'");
    if (config.jobs < 1) throw ConfigError("jobs must be at least 1");

    const FoldSplit folds = make_folds(data, config.folds, config.validation_fraction, config.seed);
    if (config.classifier) {
        run.classifier = *config.classifier;
    } else {
        if (log) log("classifier grid search over " + std::to_string(config.classifier_grid.size()) + " configs");
        run.classifier_search = gbt::grid_search(data, folds, config.classifier_grid, config.jobs);
        run.classifier = run.classifier_search->best;
    }
    run.classifier.validate();

    std::vector<FoldData> fold_parts;
    for (std::size_t f = 0; f < folds.fold_count; ++f) fold_parts.push_back(fold_data(data, folds, f));

    std::vector<Job> jobs;
    for (std::size_t f = 0; f < folds.fold_count; ++f) {
        jobs.push_back({Job::Kind::Fold, f, kBaseline, std::nullopt});
        for (const auto& m : config.methods) {
            if (resample::is_method_name(m)) {
                jobs.push_back({Job::Kind::Classic, f, m, std::nullopt});
            } else {
                for (auto s : config.sampling) jobs.push_back({Job::Kind::Generative, f, m, s});
            }
        }
    }

    std::vector<std::pair<double, double>> cells;
    for (double u : run.usr_grid)
        for (double o : run.osr_grid)
            if (o >= u - 1e-12) cells.emplace_back(u, o);

    std::vector<JobOutput> outputs(jobs.size());
    std::vector<std::exception_ptr> failures(jobs.size());
    const auto job_count = static_cast<long>(jobs.size());

#pragma omp parallel for schedule(dynamic) num_threads(config.jobs)
    for (long j = 0; j < job_count; ++j) {
        const Job& job = jobs[static_cast<std::size_t>(j)];
        JobOutput& out = outputs[static_cast<std::size_t>(j)];
        const FoldData& fd = fold_parts[job.fold];
        try {
            switch (job.kind) {
                case Job::Kind::Fold: {
                    const auto start = std::chrono::steady_clock::now();
                    ExperimentRecord base = evaluate(fd.train, fd.test, run.classifier);
                    base.dataset = data.name;
                    base.method = kBaseline;
                    base.usr = base.osr = run.ir;
                    base.fold = fd.fold;
                    base.wall_time_ms = elapsed_ms(start);
                    out.records.push_back(std::move(base));
                    for (double usr : run.usr_grid) out.records.push_back(undersample_cell(fd, usr, run.classifier, config.seed));
                    break;
                }
                case Job::Kind::Classic: {
                    const auto method = resample::method_from_string(job.method);
                    CellSynthesizer synth = [&](const Dataset& under, std::size_t n, Rng& rng) {
                        auto result = resample::oversample(method, under, n, config.resampling, rng);
                        if (result.fell_back)
                            out.warnings.push_back(fmt::format("{} fold {}: {}", job.method, job.fold, result.warning));
                        return result.rows;
                    };
                    for (const auto& [u, o] : cells)
                        out.records.push_back(run_oversampling_cell(fd, u, o, job.method, "", synth, run.classifier, config.seed));
                    break;
                }
                case Job::Kind::Generative: {
                    const SamplingKind kind = *job.sampling;
                    const std::string sampling = tabsynth::to_string(kind);
                    ModelSpec spec = config.model;
                    std::tie(spec.architecture, spec.variant) = parse_model_name(job.method);
                    spec = spec_for(spec, kind);
                    const TrainingView train_view = training_view(data, kind, fd.fit_rows);
                    const TrainingView validation_view = training_view(data, kind, fd.validation_rows);
                    const auto seed = generator_seed(config.seed, data.name, job.method, sampling, fd.fold);
                    const TrainedGenerator generator =
                        train(spec, train_view, validation_view.rows.rows() > 0 ? &validation_view : nullptr, seed);
                    out.generator_rows.emplace_back(fmt::format("{}/{}/{}", job.method, sampling, fd.fold),
                                                    generator.source_rows());
                    SamplingStrategy strategy;
                    strategy.kind = kind;
                    strategy.draw_limit = config.draw_limit;
                    CellSynthesizer synth = [&](const Dataset&, std::size_t n, Rng& rng) {
                        return draw(generator, strategy, n, 1, rng);
                    };
                    for (const auto& [u, o] : cells)
                        out.records.push_back(run_oversampling_cell(fd, u, o, job.method, sampling, synth, run.classifier, config.seed));
                    break;
                }
            }
            if (log) {
#pragma omp critical(tabsynth_grid_log)
                log(fmt::format("done: {}{}{} fold {}", job.method, job.sampling ? "/" : "",
                                job.sampling ? tabsynth::to_string(*job.sampling) : "", job.fold));
            }
        } catch (...) {
            failures[static_cast<std::size_t>(j)] = std::current_exception();
        }
    }
    for (const auto& f : failures)
        if (f) std::rethrow_exception(f);

    for (auto& out : outputs) {
        run.records.insert(run.records.end(), out.records.begin(), out.records.end());
        run.warnings.insert(run.warnings.end(), out.warnings.begin(), out.warnings.end());
        run.generator_rows.insert(run.generator_rows.end(), out.generator_rows.begin(), out.generator_rows.end());
    }
    std::sort(run.records.begin(), run.records.end(), canonical_less);
    std::sort(run.warnings.begin(), run.warnings.end());
    std::sort(run.generator_rows.begin(), run.generator_rows.end());
    return run;
}

// ---------------------------------------------------------------------------

double sample_sd(const std::vector<double>& values) {
    if (values.size() < 2) return 0.0;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

std::vector<CellSummary> summarize_cells(const std::vector<ExperimentRecord>& records) {
    using Key = std::tuple<int, std::string, std::string, double, double>;
    std::map<Key, std::pair<std::vector<double>, std::vector<double>>> values;
    std::map<Key, CellSummary> cells;
    for (const auto& r : records) {
        const Key key{method_rank(r.method), r.method, r.sampling, r.usr, r.osr};
        auto& cell = cells[key];
        cell.method = r.method;
        cell.sampling = r.sampling;
        cell.usr = r.usr;
        cell.osr = r.osr;
        ++cell.folds;
        if (r.status == Status::Timeout) {
            ++cell.timeouts;
            continue;
        }
        values[key].first.push_back(r.train_f1);
        values[key].second.push_back(r.test_f1);
    }
    std::vector<CellSummary> out;
    for (auto& [key, cell] : cells) {
        const auto it = values.find(key);
        if (it != values.end() && !it->second.second.empty()) {
            const auto& [train, test] = it->second;
            auto mean = [](const std::vector<double>& v) {
                double s = 0.0;
                for (double x : v) s += x;
                return s / static_cast<double>(v.size());
            };
            cell.train_mean = mean(train);
            cell.test_mean = mean(test);
            cell.train_sd = sample_sd(train);
            cell.test_sd = sample_sd(test);
        } else {
            cell.train_mean = cell.test_mean = std::numeric_limits<double>::quiet_NaN();
        }
        out.push_back(cell);
    }
    return out;
}

std::vector<SummaryRow> summarize(const std::vector<ExperimentRecord>& records) {
    if (records.empty()) throw InsufficientData("no records to summarize");
    std::vector<SummaryRow> rows;
    for (const auto& cell : summarize_cells(records)) {
        if (rows.empty() || rows.back().method != cell.method || rows.back().sampling != cell.sampling) {
            SummaryRow row;
            row.method = cell.method;
            row.sampling = cell.sampling;
            row.timeout = true;
            row.best = cell;
            rows.push_back(row);
        }
        SummaryRow& row = rows.back();
        if (cell.timeouts > 0) continue;
        // Cells arrive in ascending (usr, osr), so strict improvement keeps the smallest on ties.
        if (row.timeout || cell.test_mean > row.best.test_mean) {
            row.best = cell;
            row.timeout = false;
        }
    }
    return rows;
}

std::string display_name(const std::string& method) {
    if (method == kBaseline) return "Only classifier";
    if (method == kUndersample) return "Undersampling and classifier";
    if (resample::is_method_name(method)) return resample::report_name(resample::method_from_string(method));
    return upper(method);
}

void write_results_csv(const std::vector<ExperimentRecord>& records, const std::filesystem::path& path,
                       bool record_timing) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    csv::write_row(out, {"dataset", "method", "sampling", "usr", "osr", "fold", "train_f1", "test_f1", "wall_time_ms",
                         "status"});
    for (const auto& r : records) {
        const bool ok = r.status == Status::Ok;
        csv::write_row(out, {r.dataset, r.method, r.sampling, csv::format_double(r.usr), csv::format_double(r.osr),
                             std::to_string(r.fold), ok ? csv::format_double(r.train_f1) : "",
                             ok ? csv::format_double(r.test_f1) : "",
                             record_timing ? fmt::format("{:.0f}", r.wall_time_ms) : "0", status_name(r.status)});
    }
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<ExperimentRecord> read_results_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    const RawTable table = csv::read(in);
    const std::vector<std::string> expected{"dataset", "method", "sampling", "usr", "osr", "fold",
                                            "train_f1", "test_f1", "wall_time_ms", "status"};
    if (table.header != expected) throw SchemaError(path.string() + ": unexpected results header");
    std::vector<ExperimentRecord> out;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& f = table.rows[i];
        try {
            ExperimentRecord r;
            r.dataset = f[0];
            r.method = f[1];
            r.sampling = f[2];
            r.usr = std::stod(f[3]);
            r.osr = std::stod(f[4]);
            r.fold = static_cast<std::size_t>(std::stoul(f[5]));
            r.wall_time_ms = std::stod(f[8]);
            if (f[9] == "timeout") {
                r.status = Status::Timeout;
                r.train_f1 = r.test_f1 = std::numeric_limits<double>::quiet_NaN();
            } else if (f[9] == "ok") {
                r.train_f1 = std::stod(f[6]);
                r.test_f1 = std::stod(f[7]);
            } else {
                throw SchemaError("unknown status '" + f[9] + "'");
            }
            out.push_back(std::move(r));
        } catch (const std::logic_error&) {
            throw DecodeError(path.string() + ": malformed number on row " + std::to_string(i + 1));
        }
    }
    return out;
}

std::string summary_markdown(const std::vector<SummaryRow>& rows, const std::string& dataset, double ir) {
    std::ostringstream md;
    md << "# " << dataset << "\n\n";
    md << fmt::format("IR = {}. Classifier: GBT (stand-in). f1 of the minority class, mean ± sample standard "
                      "deviation over folds; each row shows the USR-OSR cell with the best mean test f1.\n\n",
                      format_ratio(ir));
    md << "| Model | Sampling | USR | OSR | Train f1 | Test f1 |\n";
    md << "|---|---|---|---|---|---|\n";
    for (const auto& row : rows) {
        const std::string sampling = capitalized(row.sampling);
        if (row.timeout) {
            md << fmt::format("| {} | {} | - | - | Timeout | Timeout |\n", display_name(row.method), sampling);
            continue;
        }
        const auto& c = row.best;
        md << fmt::format("| {} | {} | {} | {} | {:.3f} ± {:.3f} | {:.3f} ± {:.3f} |\n", display_name(row.method), sampling,
                          format_ratio(c.usr), format_ratio(c.osr), c.train_mean, c.train_sd, c.test_mean, c.test_sd);
    }
    return md.str();
}

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    csv::write_row(out, {"method", "sampling", "usr", "osr", "train_f1_mean", "train_f1_sd", "test_f1_mean",
                         "test_f1_sd", "folds", "status"});
    for (const auto& row : rows) {
        const auto& c = row.best;
        if (row.timeout) {
            csv::write_row(out, {row.method, row.sampling, "", "", "", "", "", "", std::to_string(c.folds), "timeout"});
            continue;
        }
        csv::write_row(out, {row.method, row.sampling, csv::format_double(c.usr), csv::format_double(c.osr),
                             csv::format_double(c.train_mean), csv::format_double(c.train_sd),
                             csv::format_double(c.test_mean), csv::format_double(c.test_sd), std::to_string(c.folds),
                             "ok"});
    }
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace tabsynth::protocol

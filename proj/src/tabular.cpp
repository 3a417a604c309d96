#include "tabsynth/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "tabsynth/csv.hpp"

namespace tabsynth {

using nlohmann::json;

const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Decode: return "DecodeError";
        case ErrorKind::Schema: return "SchemaError";
        case ErrorKind::DegenerateLabels: return "DegenerateLabels";
        case ErrorKind::InsufficientClassRows: return "InsufficientClassRows";
        case ErrorKind::Shape: return "ShapeError";
        case ErrorKind::NonFiniteGradient: return "NonFiniteGradient";
        case ErrorKind::InsufficientData: return "InsufficientData";
        case ErrorKind::DrawLimitExceeded: return "DrawLimitExceeded";
        case ErrorKind::Ratio: return "RatioError";
        case ErrorKind::EmptyGenerationRegion: return "EmptyGenerationRegion";
        case ErrorKind::Config: return "ConfigError";
        case ErrorKind::DegenerateData: return "DegenerateData";
        case ErrorKind::StrategyMismatch: return "StrategyMismatch";
        case ErrorKind::Io: return "IOError";
    }
    return "Error";
}

const char* to_string(VariableKind kind) {
    switch (kind) {
        case VariableKind::Categorical: return "categorical";
        case VariableKind::Binary: return "binary";
        case VariableKind::Numerical: return "numerical";
    }
    return "?";
}

VariableKind variable_kind_from_string(const std::string& text) {
    if (text == "categorical") return VariableKind::Categorical;
    if (text == "binary") return VariableKind::Binary;
    if (text == "numerical") return VariableKind::Numerical;
    throw SchemaError("unknown variable kind '" + text + "'");
}

VariableMeta VariableMeta::categorical(std::string name, std::vector<std::string> categories) {
    VariableMeta v;
    v.name = std::move(name);
    v.kind = VariableKind::Categorical;
    v.width = categories.size();
    v.categories = std::move(categories);
    return v;
}

VariableMeta VariableMeta::binary(std::string name, std::vector<std::string> values) {
    VariableMeta v;
    v.name = std::move(name);
    v.kind = VariableKind::Binary;
    v.width = 1;
    v.categories = std::move(values);
    return v;
}

VariableMeta VariableMeta::numerical(std::string name, double lo, double hi) {
    VariableMeta v;
    v.name = std::move(name);
    v.kind = VariableKind::Numerical;
    v.width = 1;
    v.scale_min = lo;
    v.scale_max = hi;
    return v;
}

std::size_t total_width(const Metadata& meta) {
    std::size_t w = 0;
    for (const auto& v : meta) w += v.width;
    return w;
}

std::vector<std::size_t> variable_offsets(const Metadata& meta) {
    std::vector<std::size_t> offsets;
    offsets.reserve(meta.size());
    std::size_t at = 0;
    for (const auto& v : meta) {
        offsets.push_back(at);
        at += v.width;
    }
    return offsets;
}

void check_metadata(const Metadata& meta) {
    for (const auto& v : meta) {
        switch (v.kind) {
            case VariableKind::Categorical:
                if (v.categories.size() < 3)
                    throw SchemaError("categorical variable '" + v.name +
                                      "' needs at least 3 categories; declare it binary");
                if (v.width != v.categories.size())
                    throw SchemaError("categorical variable '" + v.name + "' width mismatch");
                break;
            case VariableKind::Binary:
            case VariableKind::Numerical:
                if (v.width != 1) throw SchemaError("variable '" + v.name + "' must have width 1");
                break;
        }
    }
}

json metadata_to_json(const Metadata& meta) {
    json vars = json::array();
    for (const auto& v : meta) {
        json j;
        j["name"] = v.name;
        j["kind"] = to_string(v.kind);
        j["width"] = v.width;
        if (v.kind != VariableKind::Numerical) j["categories"] = v.categories;
        if (v.kind == VariableKind::Numerical) {
            j["scale_min"] = v.scale_min;
            j["scale_max"] = v.scale_max;
        }
        vars.push_back(std::move(j));
    }
    return vars;
}

Metadata metadata_from_json(const json& variables) {
    Metadata meta;
    for (const auto& j : variables) {
        VariableMeta v;
        v.name = j.at("name").get<std::string>();
        v.kind = variable_kind_from_string(j.at("kind").get<std::string>());
        if (j.contains("categories")) v.categories = j.at("categories").get<std::vector<std::string>>();
        v.width = j.value("width", v.kind == VariableKind::Categorical ? v.categories.size() : 1);
        v.scale_min = j.value("scale_min", 0.0);
        v.scale_max = j.value("scale_max", 0.0);
        meta.push_back(std::move(v));
    }
    check_metadata(meta);
    return meta;
}

std::size_t Dataset::count(int label) const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), label));
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    Dataset out;
    out.name = name;
    out.meta = meta;
    out.label_column = label_column;
    out.positive_class = positive_class;
    out.features.resize(static_cast<Eigen::Index>(indices.size()), features.cols());
    out.labels.reserve(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        out.features.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(indices[i]));
        out.labels.push_back(labels[indices[i]]);
    }
    return out;
}

void Dataset::append(const Matrix& rows, int label) {
    if (rows.rows() == 0) return;
    if (rows.cols() != features.cols())
        throw ShapeError("appended rows have width " + std::to_string(rows.cols()) + ", dataset has " +
                         std::to_string(features.cols()));
    const Eigen::Index old = features.rows();
    features.conservativeResize(old + rows.rows(), Eigen::NoChange);
    features.bottomRows(rows.rows()) = rows;
    labels.insert(labels.end(), static_cast<std::size_t>(rows.rows()), label);
}

RawSchema RawSchema::from_json(const json& j) {
    RawSchema s;
    try {
        s.label = j.at("label").get<std::string>();
        const auto& pc = j.at("positive_class");
        s.positive_class = pc.is_string() ? pc.get<std::string>() : pc.dump();
        for (const auto& v : j.at("variables")) {
            Variable var;
            var.name = v.at("name").get<std::string>();
            var.kind = variable_kind_from_string(v.at("kind").get<std::string>());
            if (v.contains("categories")) {
                for (const auto& c : v.at("categories"))
                    var.categories.push_back(c.is_string() ? c.get<std::string>() : c.dump());
            }
            s.variables.push_back(std::move(var));
        }
    } catch (const json::exception& e) {
        throw SchemaError(std::string("malformed metadata: ") + e.what());
    }
    return s;
}

namespace {

bool is_missing(const std::string& field) {
    return field.find_first_not_of(" \t") == std::string::npos;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

double parse_number(const std::string& field, std::size_t row, const std::string& column) {
    try {
        std::size_t used = 0;
        const double v = std::stod(field, &used);
        if (trim(field.substr(used)).empty() && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    throw DecodeError("row " + std::to_string(row) + ", column '" + column + "': '" + field +
                      "' is not a number");
}

}  // namespace

Dataset encode(const RawTable& table, const RawSchema& schema, std::string name) {
    std::map<std::string, std::size_t> column_of;
    for (std::size_t c = 0; c < table.header.size(); ++c) column_of[trim(table.header[c])] = c;

    if (!column_of.count(schema.label))
        throw SchemaError("label column '" + schema.label + "' not in CSV header");
    std::set<std::string> declared{schema.label};
    for (const auto& v : schema.variables) {
        if (!column_of.count(v.name)) throw SchemaError("variable '" + v.name + "' not in CSV header");
        if (!declared.insert(v.name).second) throw SchemaError("variable '" + v.name + "' declared twice");
    }
    for (const auto& h : table.header)
        if (!declared.count(trim(h))) throw SchemaError("CSV column '" + trim(h) + "' is not declared");

    const std::size_t n = table.rows.size();
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < table.header.size(); ++c)
            if (is_missing(table.rows[r][c]))
                throw DecodeError("row " + std::to_string(r + 1) + ", column '" + trim(table.header[c]) +
                                  "': missing value");

    Metadata meta;
    for (const auto& v : schema.variables) {
        const std::size_t col = column_of.at(v.name);
        switch (v.kind) {
            case VariableKind::Numerical: {
                double lo = 0.0, hi = 0.0;
                for (std::size_t r = 0; r < n; ++r) {
                    const double x = parse_number(table.rows[r][col], r + 1, v.name);
                    if (r == 0 || x < lo) lo = x;
                    if (r == 0 || x > hi) hi = x;
                }
                meta.push_back(VariableMeta::numerical(v.name, lo, hi));
                break;
            }
            case VariableKind::Categorical:
            case VariableKind::Binary: {
                std::vector<std::string> cats = v.categories;
                if (cats.empty()) {
                    std::set<std::string> seen;
                    for (std::size_t r = 0; r < n; ++r) seen.insert(trim(table.rows[r][col]));
                    cats.assign(seen.begin(), seen.end());
                }
                if (v.kind == VariableKind::Binary) {
                    if (cats.size() > 2)
                        throw SchemaError("binary variable '" + v.name + "' has more than two values");
                    meta.push_back(VariableMeta::binary(v.name, cats));
                } else {
                    if (cats.size() < 3)
                        throw SchemaError("categorical variable '" + v.name +
                                          "' has fewer than 3 categories; declare it binary");
                    meta.push_back(VariableMeta::categorical(v.name, cats));
                }
                break;
            }
        }
    }

    Dataset data;
    data.name = std::move(name);
    data.meta = meta;
    data.label_column = schema.label;
    data.positive_class = schema.positive_class;
    data.features = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(total_width(meta)));
    data.labels.resize(n);
    const auto offsets = variable_offsets(meta);
    const std::size_t label_col = column_of.at(schema.label);

    for (std::size_t r = 0; r < n; ++r) {
        const auto& raw = table.rows[r];
        const auto row = static_cast<Eigen::Index>(r);
        data.labels[r] = trim(raw[label_col]) == schema.positive_class ? 1 : 0;
        for (std::size_t vi = 0; vi < meta.size(); ++vi) {
            const auto& v = meta[vi];
            const std::size_t col = column_of.at(v.name);
            const auto at = static_cast<Eigen::Index>(offsets[vi]);
            if (v.kind == VariableKind::Numerical) {
                const double x = parse_number(raw[col], r + 1, v.name);
                data.features(row, at) = v.scale_max > v.scale_min ? (x - v.scale_min) / (v.scale_max - v.scale_min) : 0.0;
                continue;
            }
            const std::string value = trim(raw[col]);
            const auto it = std::find(v.categories.begin(), v.categories.end(), value);
            if (it == v.categories.end())
                throw DecodeError("row " + std::to_string(r + 1) + ", column '" + v.name +
                                  "': unknown category '" + value + "'");
            const auto idx = static_cast<Eigen::Index>(it - v.categories.begin());
            if (v.kind == VariableKind::Binary)
                data.features(row, at) = static_cast<double>(idx);
            else
                data.features(row, at + idx) = 1.0;
        }
    }
    return data;
}

RawTable decode(const Dataset& data) {
    RawTable table;
    for (const auto& v : data.meta) table.header.push_back(v.name);
    table.header.push_back(data.label_column);
    const auto offsets = variable_offsets(data.meta);
    for (Eigen::Index r = 0; r < data.features.rows(); ++r) {
        std::vector<std::string> out;
        for (std::size_t vi = 0; vi < data.meta.size(); ++vi) {
            const auto& v = data.meta[vi];
            const auto at = static_cast<Eigen::Index>(offsets[vi]);
            switch (v.kind) {
                case VariableKind::Numerical:
                    out.push_back(csv::format_double(v.scale_min + data.features(r, at) * (v.scale_max - v.scale_min)));
                    break;
                case VariableKind::Binary: {
                    const std::size_t idx = data.features(r, at) >= 0.5 ? 1 : 0;
                    out.push_back(idx < v.categories.size() ? v.categories[idx] : std::to_string(idx));
                    break;
                }
                case VariableKind::Categorical: {
                    Eigen::Index best = 0;
                    data.features.row(r).segment(at, static_cast<Eigen::Index>(v.width)).maxCoeff(&best);
                    out.push_back(v.categories[static_cast<std::size_t>(best)]);
                    break;
                }
            }
        }
        out.push_back(data.labels[static_cast<std::size_t>(r)] == 1 ? data.positive_class : "not_" + data.positive_class);
        table.rows.push_back(std::move(out));
    }
    return table;
}

Dataset load_raw(std::istream& csv_in, std::istream& metadata, std::string name) {
    json j;
    try {
        j = json::parse(metadata);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("metadata is not valid JSON: ") + e.what());
    }
    const auto schema = RawSchema::from_json(j);
    return encode(csv::read(csv_in), schema, std::move(name));
}

Dataset load_raw(const std::filesystem::path& csv_path, const std::filesystem::path& metadata_path) {
    std::ifstream c(csv_path);
    if (!c) throw IoError("cannot open " + csv_path.string());
    std::ifstream m(metadata_path);
    if (!m) throw IoError("cannot open " + metadata_path.string());
    return load_raw(c, m, csv_path.stem().string());
}

json dataset_metadata_json(const Dataset& data) {
    json j;
    j["name"] = data.name;
    j["label"] = data.label_column;
    j["positive_class"] = data.positive_class;
    j["variables"] = metadata_to_json(data.meta);
    std::vector<std::string> columns;
    for (const auto& v : data.meta) {
        if (v.kind == VariableKind::Categorical)
            for (const auto& c : v.categories) columns.push_back(v.name + "=" + c);
        else
            columns.push_back(v.name);
    }
    j["columns"] = columns;
    return j;
}

void save_encoded(const Dataset& data, const std::filesystem::path& csv_path,
                  const std::filesystem::path& metadata_path) {
    const json meta = dataset_metadata_json(data);
    std::ofstream c(csv_path, std::ios::binary);
    if (!c) throw IoError("cannot write " + csv_path.string());
    auto header = meta["columns"].get<std::vector<std::string>>();
    header.push_back("label");
    csv::write_row(c, header);
    std::vector<std::string> fields;
    for (Eigen::Index r = 0; r < data.features.rows(); ++r) {
        fields.clear();
        for (Eigen::Index k = 0; k < data.features.cols(); ++k) fields.push_back(csv::format_double(data.features(r, k)));
        fields.push_back(std::to_string(data.labels[static_cast<std::size_t>(r)]));
        csv::write_row(c, fields);
    }
    std::ofstream m(metadata_path, std::ios::binary);
    if (!m) throw IoError("cannot write " + metadata_path.string());
    m << meta.dump(2) << '\n';
}

Dataset load_encoded(const std::filesystem::path& csv_path, const std::filesystem::path& metadata_path) {
    std::ifstream m(metadata_path);
    if (!m) throw IoError("cannot open " + metadata_path.string());
    json j;
    try {
        j = json::parse(m);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("metadata is not valid JSON: ") + e.what());
    }
    Dataset data;
    try {
        data.name = j.value("name", csv_path.stem().string());
        data.label_column = j.at("label").get<std::string>();
        data.positive_class = j.at("positive_class").get<std::string>();
        data.meta = metadata_from_json(j.at("variables"));
    } catch (const json::exception& e) {
        throw SchemaError(std::string("malformed encoded metadata: ") + e.what());
    }
    std::ifstream c(csv_path);
    if (!c) throw IoError("cannot open " + csv_path.string());
    const RawTable table = csv::read(c);
    const std::size_t width = total_width(data.meta);
    if (table.header.size() != width + 1)
        throw SchemaError("encoded CSV has " + std::to_string(table.header.size()) + " columns, metadata implies " +
                          std::to_string(width + 1));
    data.features.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(width));
    data.labels.resize(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        for (std::size_t k = 0; k < width; ++k)
            data.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) =
                parse_number(table.rows[r][k], r + 1, table.header[k]);
        const double lab = parse_number(table.rows[r][width], r + 1, "label");
        if (lab != 0.0 && lab != 1.0) throw DecodeError("row " + std::to_string(r + 1) + ": label must be 0 or 1");
        data.labels[r] = static_cast<int>(lab);
    }
    return data;
}

double compute_ir(std::span<const int> labels) {
    std::size_t pos = 0;
    for (int l : labels) pos += (l == 1);
    const std::size_t neg = labels.size() - pos;
    if (pos == 0 || neg == 0) throw DegenerateLabels("labels contain a single class");
    return static_cast<double>(std::min(pos, neg)) / static_cast<double>(std::max(pos, neg));
}

std::vector<std::size_t> FoldSplit::test_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
        if (static_cast<std::size_t>(assignments[i]) == fold) out.push_back(i);
    return out;
}

std::vector<std::size_t> FoldSplit::train_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignments.size(); ++i)
        if (static_cast<std::size_t>(assignments[i]) != fold) out.push_back(i);
    return out;
}

std::vector<std::size_t> FoldSplit::fit_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    const auto& val = validation.at(fold);
    for (std::size_t i : train_indices(fold))
        if (!std::binary_search(val.begin(), val.end(), i)) out.push_back(i);
    return out;
}

FoldSplit make_folds(const Dataset& data, std::size_t fold_count, double validation_fraction,
                     std::uint64_t seed) {
    if (fold_count < 2) throw ConfigError("fold_count must be at least 2");
    if (validation_fraction < 0.0 || validation_fraction >= 1.0)
        throw ConfigError("validation_fraction must be in [0, 1)");
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < data.labels.size(); ++i) by_class[data.labels[i] == 1 ? 1 : 0].push_back(i);
    for (int c : {1, 0})
        if (by_class[c].size() < fold_count)
            throw InsufficientClassRows("class " + std::to_string(c) + " has " + std::to_string(by_class[c].size()) +
                                        " rows, fewer than " + std::to_string(fold_count) + " folds");

    FoldSplit split;
    split.fold_count = fold_count;
    split.validation_fraction = validation_fraction;
    split.assignments.assign(data.labels.size(), -1);

    Rng rng(seed_mix(seed, "folds"));
    // Dealing continues across classes so fold sizes stay within one row of each other.
    std::size_t deal = 0;
    for (int c : {1, 0}) {
        auto idx = by_class[c];
        std::shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t i : idx) split.assignments[i] = static_cast<int>(deal++ % fold_count);
    }

    split.validation.resize(fold_count);
    for (std::size_t f = 0; f < fold_count; ++f) {
        Rng vrng(seed_mix(seed_mix(seed, "validation"), f));
        std::vector<std::size_t> chosen;
        for (int c : {1, 0}) {
            std::vector<std::size_t> idx;
            for (std::size_t i : by_class[c])
                if (static_cast<std::size_t>(split.assignments[i]) != f) idx.push_back(i);
            std::shuffle(idx.begin(), idx.end(), vrng);
            const auto take = static_cast<std::size_t>(std::floor(validation_fraction * static_cast<double>(idx.size()) + 0.5));
            chosen.insert(chosen.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(std::min(take, idx.size())));
        }
        std::sort(chosen.begin(), chosen.end());
        split.validation[f] = std::move(chosen);
    }
    return split;
}

void discretize_inplace(std::span<double> row, const Metadata& meta) {
    std::size_t at = 0;
    for (const auto& v : meta) {
        switch (v.kind) {
            case VariableKind::Categorical: {
                std::size_t best = 0;
                for (std::size_t k = 1; k < v.width; ++k)
                    if (row[at + k] > row[at + best]) best = k;
                for (std::size_t k = 0; k < v.width; ++k) row[at + k] = k == best ? 1.0 : 0.0;
                break;
            }
            case VariableKind::Binary:
                row[at] = row[at] >= 0.5 ? 1.0 : 0.0;
                break;
            case VariableKind::Numerical:
                row[at] = std::clamp(row[at], 0.0, 1.0);
                break;
        }
        at += v.width;
    }
}

Matrix discretize(const Matrix& rows, const Metadata& meta) {
    if (static_cast<std::size_t>(rows.cols()) != total_width(meta))
        throw ShapeError("row width " + std::to_string(rows.cols()) + " does not match metadata width " +
                         std::to_string(total_width(meta)));
    Matrix out = rows;
    for (Eigen::Index r = 0; r < out.rows(); ++r)
        discretize_inplace(std::span<double>(out.row(r).data(), static_cast<std::size_t>(out.cols())), meta);
    return out;
}

bool is_valid_encoding(const Matrix& rows, const Metadata& meta, std::string* reason) {
    auto fail = [&](const std::string& why) {
        if (reason) *reason = why;
        return false;
    };
    if (static_cast<std::size_t>(rows.cols()) != total_width(meta)) return fail("width mismatch");
    const auto offsets = variable_offsets(meta);
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
        for (std::size_t vi = 0; vi < meta.size(); ++vi) {
            const auto& v = meta[vi];
            const auto at = static_cast<Eigen::Index>(offsets[vi]);
            if (v.kind == VariableKind::Numerical) {
                const double x = rows(r, at);
                if (!(x >= 0.0 && x <= 1.0)) return fail("row " + std::to_string(r) + ": " + v.name + " outside [0,1]");
            } else if (v.kind == VariableKind::Binary) {
                const double x = rows(r, at);
                if (x != 0.0 && x != 1.0) return fail("row " + std::to_string(r) + ": " + v.name + " not in {0,1}");
            } else {
                double sum = 0.0;
                for (std::size_t k = 0; k < v.width; ++k) {
                    const double x = rows(r, at + static_cast<Eigen::Index>(k));
                    if (x != 0.0 && x != 1.0) return fail("row " + std::to_string(r) + ": " + v.name + " not one-hot");
                    sum += x;
                }
                if (sum != 1.0) return fail("row " + std::to_string(r) + ": " + v.name + " block sum != 1");
            }
        }
    }
    return true;
}

}  // namespace tabsynth

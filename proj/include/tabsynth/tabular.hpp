#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tabsynth/errors.hpp"
#include "tabsynth/rng.hpp"

namespace tabsynth {

enum class VariableKind { Categorical, Binary, Numerical };

const char* to_string(VariableKind kind);
VariableKind variable_kind_from_string(const std::string& text);

struct VariableMeta {
    std::string name;
    VariableKind kind = VariableKind::Numerical;
    std::size_t width = 1;
    // Categorical: one label per encoded column. Binary: {value for 0, value for 1}.
    std::vector<std::string> categories;
    double scale_min = 0.0;
    double scale_max = 0.0;

    static VariableMeta categorical(std::string name, std::vector<std::string> categories);
    static VariableMeta binary(std::string name, std::vector<std::string> values = {"0", "1"});
    static VariableMeta numerical(std::string name, double lo = 0.0, double hi = 1.0);
};

using Metadata = std::vector<VariableMeta>;

std::size_t total_width(const Metadata& meta);
// Column offset of each variable inside an encoded row.
std::vector<std::size_t> variable_offsets(const Metadata& meta);
// Throws SchemaError when a variable violates its width/category invariants.
void check_metadata(const Metadata& meta);

nlohmann::json metadata_to_json(const Metadata& meta);
Metadata metadata_from_json(const nlohmann::json& variables);

// Encoded table: features in [0,1], labels in {0,1} with 1 the positive class.
struct Dataset {
    std::string name;
    Matrix features;
    std::vector<int> labels;
    Metadata meta;
    std::string label_column = "label";
    std::string positive_class = "1";

    std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
    std::size_t width() const { return static_cast<std::size_t>(features.cols()); }
    std::size_t count(int label) const;

    Dataset subset(std::span<const std::size_t> indices) const;
    // Appends rows that all carry the given label.
    void append(const Matrix& rows, int label);
};

// Raw, undecoded table as read from CSV.
struct RawTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

struct RawSchema {
    std::string label;
    std::string positive_class;
    struct Variable {
        std::string name;
        VariableKind kind;
        std::vector<std::string> categories;
    };
    std::vector<Variable> variables;

    static RawSchema from_json(const nlohmann::json& j);
};

Dataset encode(const RawTable& table, const RawSchema& schema, std::string name = "dataset");
// Inverse of encode for rows that satisfy the encoding invariants.
RawTable decode(const Dataset& data);

Dataset load_raw(std::istream& csv, std::istream& metadata, std::string name = "dataset");
Dataset load_raw(const std::filesystem::path& csv, const std::filesystem::path& metadata);

// Encoded dataset persistence: a float CSV (encoded columns + label) and the
// augmented metadata JSON carrying widths, categories and scaling.
void save_encoded(const Dataset& data, const std::filesystem::path& csv,
                  const std::filesystem::path& metadata);
Dataset load_encoded(const std::filesystem::path& csv, const std::filesystem::path& metadata);
nlohmann::json dataset_metadata_json(const Dataset& data);

// |minority| / |majority|, orienting the minority as the smaller class.
double compute_ir(std::span<const int> labels);

struct FoldSplit {
    std::size_t fold_count = 0;
    double validation_fraction = 0.0;
    std::vector<int> assignments;
    // Per fold: rows of that fold's training part reserved for generator validation.
    std::vector<std::vector<std::size_t>> validation;

    std::vector<std::size_t> test_indices(std::size_t fold) const;
    std::vector<std::size_t> train_indices(std::size_t fold) const;
    // Training part minus the validation subset.
    std::vector<std::size_t> fit_indices(std::size_t fold) const;
};

FoldSplit make_folds(const Dataset& data, std::size_t fold_count, double validation_fraction,
                     std::uint64_t seed);

// Maps a soft row to a valid encoding: argmax one-hot per categorical block
// (lowest index wins ties), binary threshold at 0.5, numericals clamped.
void discretize_inplace(std::span<double> row, const Metadata& meta);
Matrix discretize(const Matrix& rows, const Metadata& meta);

// True when every row satisfies the one-hot / {0,1} / [0,1] invariants.
bool is_valid_encoding(const Matrix& rows, const Metadata& meta, std::string* reason = nullptr);

}  // namespace tabsynth

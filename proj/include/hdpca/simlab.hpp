#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "hdpca/errors.hpp"
#include "hdpca/matrixcore.hpp"
#include "hdpca/spiked.hpp"

namespace hdpca::sim {

using Rng = std::mt19937_64;

/// X_it = sum_j lambda_ij F_tj + sqrt(theta) e_it with all inputs iid N(0, 1).
struct FactorDesign {
    std::size_t m = 1;
    double theta = 1.0;
    std::size_t N = 100;
    std::size_t T = 60;
};

using Design = std::variant<SpikedModelSpec, FactorDesign>;

struct SimConfig {
    Design design;
    std::size_t reps = 1000;
    std::uint64_t seed = 20240101;
    /// Worker threads; 0 means one per hardware thread.
    unsigned parallelism = 0;
    /// Conjugate spiked draws by a Haar rotation. The spectrum is unchanged.
    bool rotate = false;
};

/// Counter-based seed for replication `index` under `master`.
std::uint64_t replication_seed(std::uint64_t master, std::uint64_t index);
/// Stable 64-bit hash of a setting label (FNV-1a).
std::uint64_t label_hash(std::string_view label);

/// spec.n draws from N(0, diag(population spectrum)), as an n x p matrix.
DataMatrix gen_spiked(const SpikedModelSpec& spec, Rng& rng, bool rotate = false);
/// T x N panel.
DataMatrix gen_factor(const FactorDesign& design, Rng& rng);
DataMatrix generate(const Design& design, Rng& rng, bool rotate = false);

enum class TableId { bias, estimator_stats, mse_ratios, sure, pcp, clrt_size };

std::string_view to_string(TableId id);
/// Accepts the long names and the CLI short forms (stats, mse, clrt).
TableId parse_table_id(std::string_view name);

struct Setting {
    std::string label;
    Design design;
    /// Search bound for rank tables (SURE m_max, Bai-Ng m_0); unused elsewhere.
    std::size_t m_max = 0;
};

/// The grid behind each table. `m` and `theta` select the factor design for pcp.
std::vector<Setting> default_settings(TableId id, std::size_t m = 1, double theta = 1.0);

/// Keeps settings whose label contains every comma-separated key=value token of `filter`.
std::vector<Setting> filter_settings(std::vector<Setting> settings, std::string_view filter);

struct Record {
    std::string setting;
    std::size_t rep = 0;
    std::string statistic;
    double value = 0.0;
};

struct AggregateRow {
    std::string setting;
    std::vector<std::pair<std::string, double>> columns;

    double get(std::string_view name) const;
};

struct SimReport {
    TableId table = TableId::bias;
    std::size_t reps = 0;
    std::uint64_t seed = 0;
    std::vector<AggregateRow> rows;
    std::vector<Record> records;
    std::vector<std::string> notes;
};

/// Location and spread of Monte-Carlo draws around a target value.
struct Summary {
    std::size_t count = 0;
    double mean = 0.0;
    double sd = 0.0;        ///< divisor count - 1
    double variance = 0.0;  ///< divisor count - 1
    double mad = 0.0;       ///< mean |x - target|
    double mse = 0.0;       ///< mean (x - target)^2
    double abs_bias = 0.0;  ///< |mean - target|
};

Summary summarize(std::span<const double> values, double target);

/// Wilson score interval at 95%.
std::pair<double, double> binomial_ci(std::size_t successes, std::size_t trials);

struct RunOptions {
    std::size_t reps = 1000;
    std::uint64_t seed = 20240101;
    unsigned threads = 0;
    bool rotate = false;
};

SimReport run_settings(TableId id, const std::vector<Setting>& settings, const RunOptions& options);
/// Single design through the table's per-replication statistic.
SimReport run_table(TableId id, const SimConfig& config);

/// Raised when a replication fails; carries its index.
class ReplicationError : public NumericError {
public:
    ReplicationError(const std::string& setting, std::size_t rep, const std::string& what);
    std::size_t rep() const noexcept { return rep_; }

private:
    std::size_t rep_;
};

}  // namespace hdpca::sim

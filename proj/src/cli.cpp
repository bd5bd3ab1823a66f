#include "hdpca/cli.hpp"

#include <cstdlib>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hdpca/csv.hpp"
#include "hdpca/errors.hpp"
#include "hdpca/gof.hpp"
#include "hdpca/mp.hpp"
#include "hdpca/rank.hpp"
#include "hdpca/report_io.hpp"
#include "hdpca/simlab.hpp"
#include "hdpca/variance.hpp"

namespace hdpca {

namespace {

constexpr std::uint64_t kDefaultSeed = 20240101;
constexpr const char* kSeedVariable = "HDPCA_SEED";

std::uint64_t default_seed()
{
    if (const char* env = std::getenv(kSeedVariable)) {
        try {
            std::size_t used = 0;
            const auto v = std::stoull(env, &used);
            if (used == std::string(env).size()) return v;
        } catch (const std::exception&) {
        }
        throw InputError(std::string(kSeedVariable) + " must be an unsigned integer");
    }
    return kDefaultSeed;
}

std::string num(double v, int precision = 6)
{
    std::ostringstream os;
    os << std::setprecision(precision) << v;
    return os.str();
}

struct EstimateArgs {
    std::string input;
    std::size_t m = 0;
    std::string method = "all";
    bool json = false;
};

struct RankArgs {
    std::string input;
    std::size_t m_max = 0;
    std::string criterion = "sure_star";
    bool json = false;
};

struct GofArgs {
    std::string input;
    std::size_t m = 0;
    double level = 0.05;
    bool classical = false;
    bool json = false;
};

struct SimulateArgs {
    std::string table;
    std::optional<std::size_t> reps;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    unsigned threads = 0;
    std::size_t m = 1;
    double theta = 1.0;
    std::string setting;
    bool json = false;
};

struct MpArgs {
    double c = 0.5;
    double sigma2 = 1.0;
    std::vector<double> cdf_at;
    std::vector<double> density_at;
    std::vector<double> quantiles;
    bool json = false;
};

int run_estimate(const EstimateArgs& a, std::ostream& out, std::ostream& err)
{
    const DataMatrix data = read_csv_file(a.input);
    const Spectrum spec = spectrum(data);
    if (a.m >= std::min(spec.p(), spec.n() - 1)) throw DomainError("--m must be below min(p, n - 1)");

    std::vector<VarianceMethod> methods;
    if (a.method == "all") {
        methods = {VarianceMethod::mle, VarianceMethod::star, VarianceMethod::kn, VarianceMethod::us,
                   VarianceMethod::median};
        if (a.m == 0) std::erase(methods, VarianceMethod::kn);
    } else {
        methods = {parse_variance_method(a.method)};
    }

    int status = 0;
    std::vector<std::optional<VarianceEstimate>> results;
    for (auto method : methods) {
        try {
            switch (method) {
                case VarianceMethod::mle: results.emplace_back(mle_sigma2(spec, a.m)); break;
                case VarianceMethod::star: results.emplace_back(star_sigma2(spec, a.m)); break;
                case VarianceMethod::kn: results.emplace_back(kn_sigma2(spec, a.m)); break;
                case VarianceMethod::us: results.emplace_back(us_sigma2(spec, a.m)); break;
                case VarianceMethod::median: results.emplace_back(median_sigma2(data)); break;
            }
        } catch (const Error& e) {
            if (methods.size() == 1) throw;
            err << "hdpca: " << to_string(method) << ": " << e.what() << '\n';
            if (status == 0) status = exit_code_for(e);
            results.emplace_back(std::nullopt);
        }
    }

    if (a.json) {
        nlohmann::json j;
        j["schema"] = io::kSchemaVersion;
        j["p"] = spec.p();
        j["n"] = spec.n();
        j["c_n"] = spec.cn();
        j["m"] = a.m;
        auto arr = nlohmann::json::array();
        for (std::size_t k = 0; k < methods.size(); ++k) {
            if (results[k]) arr.push_back(io::to_json(*results[k]));
            else arr.push_back({{"method", to_string(methods[k])}, {"value", nullptr}, {"failed", true}});
        }
        j["estimates"] = std::move(arr);
        out << j.dump(2) << '\n';
        return status;
    }

    out << "p = " << spec.p() << ", n = " << spec.n() << ", c_n = " << num(spec.cn()) << ", m = " << a.m << '\n';
    out << std::left << std::setw(8) << "method" << std::right << std::setw(14) << "sigma2" << std::setw(14) << "se"
        << std::setw(8) << "iter" << '\n';
    for (std::size_t k = 0; k < methods.size(); ++k) {
        out << std::left << std::setw(8) << to_string(methods[k]) << std::right;
        if (!results[k]) {
            out << std::setw(14) << "failed" << '\n';
            continue;
        }
        const auto& e = *results[k];
        out << std::setw(14) << num(e.value) << std::setw(14) << (e.se ? num(*e.se) : "-") << std::setw(8)
            << (e.iterations ? std::to_string(*e.iterations) : "-") << '\n';
        for (const auto& d : e.diagnostics) out << "  note: " << d << '\n';
    }
    return status;
}

int run_rank(const RankArgs& a, std::ostream& out, std::ostream& err)
{
    const DataMatrix data = read_csv_file(a.input);
    const Spectrum spec = spectrum(data);

    std::vector<RankReport> reports;
    const std::string& c = a.criterion;
    if (c == "sure" || c == "sure_star") {
        reports.push_back(sure(spec, a.m_max, c == "sure" ? SureVariant::us : SureVariant::star));
    } else if (c == "pcp" || c == "pcp_star" || c == "icp" || c == "icp_star") {
        const auto family = c.starts_with("pcp") ? PenaltyFamily::pcp : PenaltyFamily::icp;
        const auto variant = c.ends_with("_star") ? BaiNgVariant::star : BaiNgVariant::plain;
        for (auto& r : bai_ng(spec, a.m_max, family, variant)) reports.push_back(std::move(r));
    } else {
        throw InputError("unknown criterion '" + c + "'");
    }

    for (const auto& r : reports)
        if (r.at_boundary())
            err << "hdpca: warning: " << to_string(r.criterion) << " selected the search bound m_max = " << r.m_max
                << "; the true count may be larger\n";

    if (a.json) {
        nlohmann::json j;
        j["schema"] = io::kSchemaVersion;
        j["p"] = spec.p();
        j["n"] = spec.n();
        auto arr = nlohmann::json::array();
        for (const auto& r : reports) arr.push_back(io::to_json(r));
        j["reports"] = std::move(arr);
        out << j.dump(2) << '\n';
        return 0;
    }

    out << std::left << std::setw(6) << "m";
    for (const auto& r : reports) out << std::right << std::setw(16) << to_string(r.criterion);
    out << '\n';
    for (std::size_t k = 0; k < reports.front().candidates.size(); ++k) {
        out << std::left << std::setw(6) << reports.front().candidates[k] << std::right;
        for (const auto& r : reports) out << std::setw(16) << num(r.values[k], 8);
        out << '\n';
    }
    out << std::left << std::setw(6) << "pick" << std::right;
    for (const auto& r : reports) out << std::setw(16) << r.selected_m;
    out << '\n';
    for (const auto& r : reports)
        for (const auto& note : r.notes) out << "note: " << to_string(r.criterion) << ": " << note << '\n';
    return 0;
}

int run_gof(const GofArgs& a, std::ostream& out)
{
    const DataMatrix data = read_csv_file(a.input);
    const Spectrum spec = spectrum(data);
    const GofReport r = clrt(spec, a.m, a.level);
    if (a.classical && lrt_degrees_of_freedom(spec.p(), a.m) < 1)
        throw DomainError("over-parameterized model: no degrees of freedom left for the classical LRT");

    if (a.json) {
        nlohmann::json j = io::to_json(r, a.classical);
        j["schema"] = io::kSchemaVersion;
        out << j.dump(2) << '\n';
        return 0;
    }
    out << "corrected LRT for m = " << a.m << " (p = " << spec.p() << ", n = " << spec.n() << ", c_n = " << num(spec.cn())
        << ")\n";
    out << "  L*        " << num(r.l_star, 8) << '\n';
    out << "  Delta_n   " << num(r.delta_n, 8) << '\n';
    out << "  p-value   " << num(r.p_value_clrt, 6) << '\n';
    out << "  decision  " << (r.reject_clrt ? "reject" : "do not reject") << " at level " << a.level << '\n';
    if (a.classical) {
        out << "Bartlett-corrected LRT\n";
        out << "  statistic " << num(r.bartlett.statistic, 8) << '\n';
        out << "  df        " << r.bartlett.df << '\n';
        out << "  p-value   " << num(r.bartlett.p_value, 6) << '\n';
        out << "  decision  " << (r.reject_lrt ? "reject" : "do not reject") << " at level " << a.level << '\n';
    }
    return 0;
}

int run_simulate(const SimulateArgs& a, std::ostream& out)
{
    const sim::TableId id = sim::parse_table_id(a.table);
    auto settings = sim::default_settings(id, a.m, a.theta);
    if (!a.setting.empty()) {
        settings = sim::filter_settings(std::move(settings), a.setting);
        if (settings.empty()) throw InputError("no setting of table " + a.table + " matches '" + a.setting + "'");
    }
    sim::RunOptions options;
    options.reps = a.reps.value_or(1000);
    options.seed = a.seed ? *a.seed : default_seed();
    options.threads = a.threads;
    const sim::SimReport report = sim::run_settings(id, settings, options);

    if (!a.out_dir.empty()) io::write_report_files(a.out_dir, report, a.json);
    if (a.json)
        out << io::to_json(report, false).dump(2) << '\n';
    else
        io::write_aggregate_text(out, report);
    return 0;
}

int run_mp(const MpArgs& a, std::ostream& out)
{
    const mp::MpLaw law(a.c, a.sigma2);
    const auto edges = mp::support_edges(law);
    const double median = mp::median(law);
    if (a.json) {
        nlohmann::json j;
        j["schema"] = io::kSchemaVersion;
        j["c"] = a.c;
        j["sigma2"] = a.sigma2;
        j["support"] = {edges.lower, edges.upper};
        j["atom_at_zero"] = mp::atom_at_zero(law);
        j["median"] = median;
        if (a.c < 1.0) j["log_moment"] = mp::log_moment(a.c);
        for (double x : a.cdf_at) j["cdf"].push_back({{"x", x}, {"value", mp::cdf(law, x)}});
        for (double x : a.density_at) j["density"].push_back({{"x", x}, {"value", mp::density(law, x)}});
        for (double q : a.quantiles) j["quantile"].push_back({{"q", q}, {"value", mp::quantile(law, q)}});
        out << j.dump(2) << '\n';
        return 0;
    }
    out << "Marcenko-Pastur law c = " << num(a.c) << ", sigma2 = " << num(a.sigma2) << '\n';
    out << "  support      [" << num(edges.lower, 10) << ", " << num(edges.upper, 10) << "]\n";
    out << "  atom at 0    " << num(mp::atom_at_zero(law), 10) << '\n';
    out << "  median       " << num(median, 10) << '\n';
    if (a.c < 1.0) out << "  E log(x) - log(sigma2)  " << num(mp::log_moment(a.c), 10) << '\n';
    for (double x : a.cdf_at) out << "  cdf(" << num(x) << ")  " << num(mp::cdf(law, x), 10) << '\n';
    for (double x : a.density_at) out << "  density(" << num(x) << ")  " << num(mp::density(law, x), 10) << '\n';
    for (double q : a.quantiles) out << "  quantile(" << num(q) << ")  " << num(mp::quantile(law, q), 10) << '\n';
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"High-dimensional probabilistic PCA: noise variance, rank selection, goodness of fit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "hdpca 1.0.0");

    EstimateArgs est;
    auto* estimate = app.add_subcommand("estimate", "Estimate the noise variance from a CSV data matrix");
    estimate->add_option("--input", est.input, "CSV file, one observation per row")->required();
    estimate->add_option("--m", est.m, "Number of spikes")->required();
    estimate->add_option("--method", est.method, "all, mle, star, kn, us or median")
        ->check(CLI::IsMember({"all", "mle", "star", "kn", "us", "median"}));
    estimate->add_flag("--json", est.json, "Machine-readable output");

    RankArgs rk;
    auto* rank = app.add_subcommand("rank", "Select the number of principal components");
    rank->add_option("--input", rk.input, "CSV file, one observation per row")->required();
    rank->add_option("--m-max", rk.m_max, "Search bound (and pilot count for the Bai-Ng criteria)")->required();
    rank->add_option("--criterion", rk.criterion, "sure_star, sure, pcp, pcp_star, icp or icp_star")
        ->check(CLI::IsMember({"sure_star", "sure", "pcp", "pcp_star", "icp", "icp_star"}));
    rank->add_flag("--json", rk.json, "Machine-readable output");

    GofArgs gf;
    auto* gof = app.add_subcommand("gof", "Test the fit of an m-spike model");
    gof->add_option("--input", gf.input, "CSV file, one observation per row")->required();
    gof->add_option("--m", gf.m, "Number of spikes under the null")->required();
    gof->add_option("--level", gf.level, "Test level")->check(CLI::Range(0.0, 1.0));
    gof->add_flag("--classical", gf.classical, "Also run the Bartlett-corrected LRT");
    gof->add_flag("--json", gf.json, "Machine-readable output");

    SimulateArgs sm;
    auto* simulate = app.add_subcommand("simulate", "Regenerate a Monte-Carlo table");
    simulate->add_option("--table", sm.table, "bias, stats, mse, sure, pcp or clrt")->required();
    simulate->add_option("--reps", sm.reps, "Replications per setting (default 1000)")->check(CLI::PositiveNumber);
    simulate->add_option("--seed", sm.seed, std::string("Master seed (default $") + kSeedVariable + " or 20240101)");
    simulate->add_option("--out", sm.out_dir, "Directory for the per-replication and aggregate CSV files");
    simulate->add_option("--threads", sm.threads, "Worker threads (0 = all cores)");
    simulate->add_option("--m", sm.m, "Factor count for the pcp table")->check(CLI::PositiveNumber);
    simulate->add_option("--theta", sm.theta, "Idiosyncratic variance for the pcp table")->check(CLI::PositiveNumber);
    simulate->add_option("--setting", sm.setting, "Only settings matching all key=value tokens, e.g. p=90,n=100");
    simulate->add_flag("--json", sm.json, "Machine-readable output (also writes <table>.json with --out)");

    MpArgs mpa;
    auto* mpc = app.add_subcommand("mp", "Evaluate the Marcenko-Pastur law");
    mpc->add_option("--c", mpa.c, "Dimension-to-sample ratio")->required();
    mpc->add_option("--sigma2", mpa.sigma2, "Scale");
    mpc->add_option("--cdf", mpa.cdf_at, "Points at which to evaluate the CDF");
    mpc->add_option("--density", mpa.density_at, "Points at which to evaluate the density");
    mpc->add_option("--quantile", mpa.quantiles, "Probability levels");
    mpc->add_flag("--json", mpa.json, "Machine-readable output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*estimate) return run_estimate(est, out, err);
        if (*rank) return run_rank(rk, out, err);
        if (*gof) return run_gof(gf, out);
        if (*simulate) return run_simulate(sm, out);
        if (*mpc) return run_mp(mpa, out);
    } catch (const Error& e) {
        err << "hdpca: " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "hdpca: " << e.what() << '\n';
        return 3;
    }
    return 2;
}

}  // namespace hdpca

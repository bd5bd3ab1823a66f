#include "hdpca/simlab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "hdpca/gof.hpp"
#include "hdpca/mp.hpp"
#include "hdpca/rank.hpp"
#include "hdpca/variance.hpp"

namespace hdpca::sim {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kPilotRank = 8;
constexpr double kNominalLevel = 0.05;

std::uint64_t mix64(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::string fmt(double v)
{
    std::ostringstream os;
    os << v;
    return os.str();
}

SpikedModelSpec model(int id, std::size_t p, std::size_t n)
{
    switch (id) {
        case 1: return SpikedModelSpec({25, 16, 9}, 4.0, p, n);
        case 2: return SpikedModelSpec({4, 3}, 2.0, p, n);
        case 3: return SpikedModelSpec({12, 10, 8}, {1, 1, 2}, 3.0, p, n);
        default: return SpikedModelSpec({8, 7}, 1.0, p, n);
    }
}

Setting model_setting(int id, std::size_t p, std::size_t n)
{
    return {"model=" + std::to_string(id) + ",p=" + std::to_string(p) + ",n=" + std::to_string(n), model(id, p, n), 0};
}

// Loadings F D^{1/2} with F an orthogonalized p x m Gaussian matrix, F'F = p I,
// so the spikes are p times D = diag((m+1)^2, m^2, ..., 3^2, 1.5) over unit noise.
SpikedModelSpec sure_model(std::size_t m, std::size_t p, std::size_t n)
{
    std::vector<double> alphas;
    const auto scale = static_cast<double>(p);
    for (std::size_t k = m + 1; k >= 3; --k) alphas.push_back(scale * static_cast<double>(k * k));
    alphas.push_back(scale * 1.5);
    return SpikedModelSpec(std::move(alphas), 1.0, p, n);
}

const SpikedModelSpec& spiked_of(const Setting& s)
{
    const auto* spec = std::get_if<SpikedModelSpec>(&s.design);
    if (!spec) throw DomainError("setting '" + s.label + "' is not a spiked design");
    return *spec;
}

const FactorDesign& factor_of(const Setting& s)
{
    const auto* d = std::get_if<FactorDesign>(&s.design);
    if (!d) throw DomainError("setting '" + s.label + "' is not a factor design");
    return *d;
}

using Stats = std::vector<std::pair<std::string, double>>;

double standardized(double estimate, double sigma2, std::size_t p, std::size_t m, double c)
{
    return static_cast<double>(p - m) * (estimate - sigma2) / (sigma2 * std::sqrt(2.0 * c));
}

Stats replicate(TableId id, const Setting& setting, Rng& rng, bool rotate)
{
    Stats out;
    switch (id) {
        case TableId::bias: {
            const auto& spec = spiked_of(setting);
            const Spectrum sp = spectrum(gen_spiked(spec, rng, rotate));
            out.emplace_back("mle", mle_sigma2(sp, spec.m()).value);
            break;
        }
        case TableId::estimator_stats: {
            const auto& spec = spiked_of(setting);
            const Spectrum sp = spectrum(gen_spiked(spec, rng, rotate));
            const std::size_t m = spec.m();
            const double mle = mle_sigma2(sp, m).value;
            const VarianceEstimate star = star_sigma2(sp, m, SubEdgePolicy::clamp_to_edge);
            const double c = sp.cn();
            const double b = bias_term(spec.expanded_alphas(), spec.sigma2, c);
            out.emplace_back("mle", mle);
            out.emplace_back("star", star.value);
            out.emplace_back("z_mle", standardized(mle, spec.sigma2, spec.p, m, c) + b);
            out.emplace_back("z_star", standardized(star.value, spec.sigma2, spec.p, m, c));
            out.emplace_back("star_clamped", star.diagnostics.empty() ? 0.0 : 1.0);
            break;
        }
        case TableId::mse_ratios: {
            const auto& spec = spiked_of(setting);
            const DataMatrix data = gen_spiked(spec, rng, rotate);
            const Spectrum sp = spectrum(data);
            const std::size_t m = spec.m();
            out.emplace_back("mle", mle_sigma2(sp, m).value);
            out.emplace_back("star", star_sigma2(sp, m, SubEdgePolicy::clamp_to_edge).value);
            double kn = kNaN;
            try {
                kn = kn_sigma2(sp, m).value;
            } catch (const NumericError&) {
            }
            out.emplace_back("kn", kn);
            out.emplace_back("us", us_sigma2(sp, m).value);
            out.emplace_back("median", median_sigma2(data).value);
            break;
        }
        case TableId::sure: {
            const auto& spec = spiked_of(setting);
            const Spectrum sp = spectrum(gen_spiked(spec, rng, rotate));
            out.emplace_back("sure", static_cast<double>(sure(sp, setting.m_max, SureVariant::us).selected_m));
            out.emplace_back("sure_star", static_cast<double>(sure(sp, setting.m_max, SureVariant::star).selected_m));
            break;
        }
        case TableId::pcp: {
            const Spectrum sp = spectrum(gen_factor(factor_of(setting), rng));
            for (auto variant : {BaiNgVariant::star, BaiNgVariant::plain}) {
                const auto reports = bai_ng(sp, setting.m_max, PenaltyFamily::pcp, variant);
                for (const auto& r : reports)
                    out.emplace_back(std::string(to_string(r.criterion)), static_cast<double>(r.selected_m));
            }
            break;
        }
        case TableId::clrt_size: {
            const auto& spec = spiked_of(setting);
            const Spectrum sp = spectrum(gen_spiked(spec, rng, rotate));
            const GofReport g = clrt(sp, spec.m(), kNominalLevel, SubEdgePolicy::clamp_to_edge);
            out.emplace_back("delta_n", g.delta_n);
            out.emplace_back("reject_clrt", g.reject_clrt ? 1.0 : 0.0);
            out.emplace_back("reject_lrt", g.reject_lrt ? 1.0 : 0.0);
            const auto inverted = estimate_spikes(sp, spec.m(), g.terms.sigma2_star, SubEdgePolicy::clamp_to_edge);
            out.emplace_back("clamped", inverted.clamped.empty() ? 0.0 : 1.0);
            break;
        }
    }
    return out;
}

std::vector<double> column(const std::vector<Stats>& reps, std::size_t k)
{
    std::vector<double> v;
    v.reserve(reps.size());
    for (const auto& r : reps) v.push_back(r[k].second);
    return v;
}

std::vector<double> finite_only(std::vector<double> v)
{
    v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return !std::isfinite(x); }), v.end());
    return v;
}

double sum_of(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

void design_columns(const Setting& s, AggregateRow& row)
{
    if (const auto* spec = std::get_if<SpikedModelSpec>(&s.design)) {
        row.columns.emplace_back("p", static_cast<double>(spec->p));
        row.columns.emplace_back("n", static_cast<double>(spec->n));
        row.columns.emplace_back("m", static_cast<double>(spec->m()));
        row.columns.emplace_back("sigma2", spec->sigma2);
    } else {
        const auto& d = std::get<FactorDesign>(s.design);
        row.columns.emplace_back("N", static_cast<double>(d.N));
        row.columns.emplace_back("T", static_cast<double>(d.T));
        row.columns.emplace_back("m", static_cast<double>(d.m));
        row.columns.emplace_back("theta", d.theta);
    }
}

AggregateRow aggregate(TableId id, const Setting& setting, const std::vector<Stats>& reps,
                       std::vector<std::string>& notes)
{
    AggregateRow row;
    row.setting = setting.label;
    design_columns(setting, row);
    auto add = [&row](std::string name, double v) { row.columns.emplace_back(std::move(name), v); };
    const auto& names = reps.front();

    switch (id) {
        case TableId::bias: {
            const auto& spec = spiked_of(setting);
            const Summary s = summarize(column(reps, 0), spec.sigma2);
            const double theory = theoretical_mle_bias(spec, spec.ratio());
            add("empirical_bias", s.mean - spec.sigma2);
            add("theoretical_bias", theory);
            add("abs_difference", std::abs(s.mean - spec.sigma2 - theory));
            break;
        }
        case TableId::estimator_stats: {
            const auto& spec = spiked_of(setting);
            for (std::size_t k = 0; k < 2; ++k) {
                const Summary s = summarize(column(reps, k), spec.sigma2);
                add(names[k].first + "_mean", s.mean);
                add(names[k].first + "_mad", s.mad);
                add(names[k].first + "_mse", s.mse);
                add(names[k].first + "_abs_bias", s.abs_bias);
            }
            for (std::size_t k = 2; k < 4; ++k) {
                const Summary s = summarize(column(reps, k), 0.0);
                add(names[k].first + "_mean", s.mean);
                add(names[k].first + "_var", s.variance);
            }
            add("clamped_reps", sum_of(column(reps, 4)));
            break;
        }
        case TableId::mse_ratios: {
            const auto& spec = spiked_of(setting);
            std::map<std::string, double> mse;
            for (std::size_t k = 0; k < names.size(); ++k) {
                const auto all = column(reps, k);
                const auto ok = finite_only(all);
                if (ok.size() < all.size())
                    notes.push_back(setting.label + ": " + names[k].first + " failed in " +
                                    std::to_string(all.size() - ok.size()) + " replication(s), excluded");
                mse[names[k].first] = ok.empty() ? kNaN : summarize(ok, spec.sigma2).mse;
            }
            for (const char* e : {"mle", "star", "kn", "us", "median"}) add(std::string("mse_") + e, mse[e]);
            for (const char* e : {"kn", "us", "median"}) add(std::string("ratio_") + e, mse[e] / mse["star"]);
            add("kn_failures", static_cast<double>(reps.size() - finite_only(column(reps, 2)).size()));
            break;
        }
        case TableId::sure: {
            const auto& spec = spiked_of(setting);
            const auto truth = static_cast<double>(spec.m());
            for (std::size_t k : {std::size_t{1}, std::size_t{0}}) {
                const auto v = column(reps, k);
                const auto hits = static_cast<double>(std::count(v.begin(), v.end(), truth));
                add("rate_" + names[k].first, hits / static_cast<double>(v.size()));
                add("mean_" + names[k].first, summarize(v, truth).mean);
            }
            add("m_max", static_cast<double>(setting.m_max));
            break;
        }
        case TableId::pcp: {
            for (std::size_t k = 0; k < names.size(); ++k) {
                const Summary s = summarize(column(reps, k), 0.0);
                add(names[k].first + "_mean", s.mean);
                add(names[k].first + "_sd", s.sd);
            }
            break;
        }
        case TableId::clrt_size: {
            const auto trials = reps.size();
            for (std::size_t k : {std::size_t{1}, std::size_t{2}}) {
                const auto hits = static_cast<std::size_t>(sum_of(column(reps, k)));
                const auto [lo, hi] = binomial_ci(hits, trials);
                const std::string tag = k == 1 ? "clrt" : "lrt";
                add("size_" + tag, static_cast<double>(hits) / static_cast<double>(trials));
                add("ci_low_" + tag, lo);
                add("ci_high_" + tag, hi);
            }
            const Summary d = summarize(column(reps, 0), 0.0);
            add("delta_mean", d.mean);
            add("delta_var", d.variance);
            add("clamped_reps", sum_of(column(reps, 3)));
            break;
        }
    }
    return row;
}

// Runs body(rep) for rep in [0, reps) over a pool of workers pulling indices
// from a shared counter. The first failure stops the pool and is rethrown.
template <class Body>
void parallel_reps(std::size_t reps, unsigned threads, const std::string& label, Body&& body)
{
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, reps));

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex failure_mutex;
    std::size_t failed_rep = 0;
    std::string failure;

    auto worker = [&] {
        while (!failed.load(std::memory_order_relaxed)) {
            const std::size_t rep = next.fetch_add(1);
            if (rep >= reps) return;
            try {
                body(rep);
            } catch (const std::exception& e) {
                std::lock_guard lock(failure_mutex);
                if (!failed.exchange(true) || rep < failed_rep) {
                    failed_rep = rep;
                    failure = e.what();
                }
            }
        }
    };

    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    if (failed) throw ReplicationError(label, failed_rep, failure);
}

std::vector<std::pair<std::size_t, std::size_t>> pcp_grid()
{
    return {{100, 40},   {100, 60},  {200, 60},   {500, 60},  {1000, 60}, {2000, 60},  {100, 100}, {200, 100},
            {500, 100},  {1000, 100}, {2000, 100}, {40, 100},  {60, 100},  {60, 200},   {60, 500},  {60, 1000},
            {60, 2000},  {4000, 60}, {4000, 100}, {8000, 60}, {8000, 100}, {60, 4000}, {100, 4000}, {60, 8000},
            {100, 8000}, {10, 50},   {10, 100},   {20, 100},  {100, 10},  {100, 20}};
}

}  // namespace

std::uint64_t replication_seed(std::uint64_t master, std::uint64_t index)
{
    return mix64(mix64(master) + kGolden * (index + 1));
}

std::uint64_t label_hash(std::string_view label)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : label) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

DataMatrix gen_spiked(const SpikedModelSpec& spec, Rng& rng, bool rotate)
{
    std::normal_distribution<double> normal;
    const auto pop = spec.population_spectrum();
    Eigen::MatrixXd x(spec.n, spec.p);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double scale = std::sqrt(pop[static_cast<std::size_t>(j)]);
        for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, j) = scale * normal(rng);
    }
    if (rotate) {
        Eigen::MatrixXd g(spec.p, spec.p);
        for (Eigen::Index j = 0; j < g.cols(); ++j)
            for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = normal(rng);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
        Eigen::MatrixXd q = qr.householderQ();
        const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
        for (Eigen::Index j = 0; j < q.cols(); ++j)
            if (r(j, j) < 0.0) q.col(j) = -q.col(j);
        x = x * q.transpose();
    }
    return DataMatrix(std::move(x));
}

DataMatrix gen_factor(const FactorDesign& d, Rng& rng)
{
    if (d.m < 1) throw DomainError("factor design needs m >= 1");
    if (!(d.theta > 0.0)) throw DomainError("factor design needs theta > 0");
    std::normal_distribution<double> normal;
    auto draw = [&](std::size_t rows, std::size_t cols) {
        Eigen::MatrixXd a(rows, cols);
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = normal(rng);
        return a;
    };
    const Eigen::MatrixXd f = draw(d.T, d.m);
    const Eigen::MatrixXd loadings = draw(d.N, d.m);
    Eigen::MatrixXd x = draw(d.T, d.N) * std::sqrt(d.theta);
    x.noalias() += f * loadings.transpose();
    return DataMatrix(std::move(x));
}

DataMatrix generate(const Design& design, Rng& rng, bool rotate)
{
    if (const auto* spec = std::get_if<SpikedModelSpec>(&design)) return gen_spiked(*spec, rng, rotate);
    return gen_factor(std::get<FactorDesign>(design), rng);
}

std::string_view to_string(TableId id)
{
    switch (id) {
        case TableId::bias: return "bias";
        case TableId::estimator_stats: return "estimator_stats";
        case TableId::mse_ratios: return "mse_ratios";
        case TableId::sure: return "sure";
        case TableId::pcp: return "pcp";
        case TableId::clrt_size: return "clrt_size";
    }
    return "?";
}

TableId parse_table_id(std::string_view name)
{
    static const std::map<std::string_view, TableId> names = {
        {"bias", TableId::bias},           {"estimator_stats", TableId::estimator_stats},
        {"stats", TableId::estimator_stats}, {"mse_ratios", TableId::mse_ratios},
        {"mse", TableId::mse_ratios},      {"sure", TableId::sure},
        {"pcp", TableId::pcp},             {"clrt_size", TableId::clrt_size},
        {"clrt", TableId::clrt_size},
    };
    const auto it = names.find(name);
    if (it == names.end()) throw InputError("unknown table '" + std::string(name) + "'");
    return it->second;
}

std::vector<Setting> default_settings(TableId id, std::size_t m, double theta)
{
    std::vector<Setting> out;
    switch (id) {
        case TableId::bias:
        case TableId::estimator_stats:
        case TableId::mse_ratios:
            for (auto [p, n] : {std::pair<std::size_t, std::size_t>{100, 100}, {400, 400}, {800, 800}})
                out.push_back(model_setting(1, p, n));
            for (auto [p, n] : {std::pair<std::size_t, std::size_t>{20, 100}, {80, 400}, {200, 1000}})
                out.push_back(model_setting(2, p, n));
            for (auto [p, n] : {std::pair<std::size_t, std::size_t>{150, 100}, {600, 400}, {1500, 1000}})
                out.push_back(model_setting(3, p, n));
            break;
        case TableId::sure: {
            constexpr std::size_t p = 64;
            for (std::size_t spikes : {5, 10, 15, 20})
                for (std::size_t n : {96, 128, 160}) {
                    Setting s{"m=" + std::to_string(spikes) + ",p=64,n=" + std::to_string(n), sure_model(spikes, p, n),
                              0};
                    s.m_max = std::min(p, n - 1) / 2;
                    out.push_back(std::move(s));
                }
            break;
        }
        case TableId::pcp:
            for (auto [N, T] : pcp_grid()) {
                std::ostringstream label;
                label << "N=" << N << ",T=" << T << ",m=" << m << ",theta=" << fmt(theta);
                out.push_back({label.str(), FactorDesign{m, theta, N, T}, kPilotRank});
            }
            break;
        case TableId::clrt_size:
            for (auto [p, n] : {std::pair<std::size_t, std::size_t>{90, 100}, {180, 200}, {720, 800}})
                out.push_back(model_setting(1, p, n));
            for (auto [p, n] : {std::pair<std::size_t, std::size_t>{20, 100}, {80, 400}, {200, 1000}})
                out.push_back(model_setting(2, p, n));
            for (std::size_t p : {5, 10, 50, 100, 200, 250, 300}) out.push_back(model_setting(4, p, 500));
            break;
    }
    return out;
}

std::vector<Setting> filter_settings(std::vector<Setting> settings, std::string_view filter)
{
    std::vector<std::string> tokens;
    std::string current;
    for (char ch : filter) {
        if (ch == ',') {
            if (!current.empty()) tokens.push_back(current);
            current.clear();
        } else if (ch != ' ') {
            current.push_back(ch);
        }
    }
    if (!current.empty()) tokens.push_back(current);

    auto has_token = [](const std::string& label, const std::string& token) {
        std::size_t start = 0;
        while (start <= label.size()) {
            const std::size_t end = std::min(label.find(',', start), label.size());
            if (label.compare(start, end - start, token) == 0) return true;
            start = end + 1;
        }
        return false;
    };
    std::erase_if(settings, [&](const Setting& s) {
        return !std::all_of(tokens.begin(), tokens.end(), [&](const auto& t) { return has_token(s.label, t); });
    });
    return settings;
}

double AggregateRow::get(std::string_view name) const
{
    for (const auto& [k, v] : columns)
        if (k == name) return v;
    throw DomainError("no aggregate column '" + std::string(name) + "'");
}

Summary summarize(std::span<const double> values, double target)
{
    Summary s;
    s.count = values.size();
    if (values.empty()) return s;
    const auto count = static_cast<double>(values.size());
    for (double v : values) {
        s.mean += v;
        s.mad += std::abs(v - target);
        s.mse += (v - target) * (v - target);
    }
    s.mean /= count;
    s.mad /= count;
    s.mse /= count;
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.variance = values.size() > 1 ? ss / (count - 1.0) : 0.0;
    s.sd = std::sqrt(s.variance);
    s.abs_bias = std::abs(s.mean - target);
    return s;
}

std::pair<double, double> binomial_ci(std::size_t successes, std::size_t trials)
{
    if (trials == 0) return {0.0, 1.0};
    constexpr double z = 1.959963984540054;
    const auto n = static_cast<double>(trials);
    const double phat = static_cast<double>(successes) / n;
    const double denom = 1.0 + z * z / n;
    const double centre = (phat + z * z / (2.0 * n)) / denom;
    const double half = z * std::sqrt(phat * (1.0 - phat) / n + z * z / (4.0 * n * n)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

SimReport run_settings(TableId id, const std::vector<Setting>& settings, const RunOptions& options)
{
    if (options.reps < 1) throw DomainError("reps must be at least 1");
    SimReport report;
    report.table = id;
    report.reps = options.reps;
    report.seed = options.seed;
    for (const auto& setting : settings) {
        const std::uint64_t stream = replication_seed(options.seed, label_hash(setting.label));
        std::vector<Stats> reps(options.reps);
        parallel_reps(options.reps, options.threads, setting.label, [&](std::size_t rep) {
            Rng rng(replication_seed(stream, rep));
            reps[rep] = replicate(id, setting, rng, options.rotate);
        });
        for (std::size_t rep = 0; rep < reps.size(); ++rep)
            for (const auto& [name, value] : reps[rep]) report.records.push_back({setting.label, rep, name, value});
        report.rows.push_back(aggregate(id, setting, reps, report.notes));
    }
    return report;
}

SimReport run_table(TableId id, const SimConfig& config)
{
    Setting setting{"", config.design, 0};
    if (const auto* spec = std::get_if<SpikedModelSpec>(&config.design)) {
        setting.label = "p=" + std::to_string(spec->p) + ",n=" + std::to_string(spec->n);
        setting.m_max = std::min(spec->p, spec->n - 1) - 1;
    } else {
        const auto& d = std::get<FactorDesign>(config.design);
        setting.label = "N=" + std::to_string(d.N) + ",T=" + std::to_string(d.T) + ",m=" + std::to_string(d.m) +
                        ",theta=" + fmt(d.theta);
        setting.m_max = kPilotRank;
    }
    return run_settings(id, {setting}, {config.reps, config.seed, config.parallelism, config.rotate});
}

ReplicationError::ReplicationError(const std::string& setting, std::size_t rep, const std::string& what)
    : NumericError("replication " + std::to_string(rep) + " of " + setting + " failed: " + what), rep_(rep)
{
}

}  // namespace hdpca::sim

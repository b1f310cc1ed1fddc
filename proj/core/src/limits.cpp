#include "nrpp/limits.hpp"

#include "nrpp/catalog.hpp"
#include "nrpp/errors.hpp"
#include "nrpp/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

namespace nrpp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& cov, std::string_view what) {
    const double scale = std::max(1.0, cov.diagonal().maxCoeff());
    double jitter = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
        Eigen::MatrixXd work = cov;
        work.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(work);
        if (llt.info() == Eigen::Success) {
            return llt.matrixL();
        }
        jitter = jitter == 0.0 ? 1e-14 * scale : jitter * 10.0;
    }
    fail(ErrorKind::numerical, std::string(what) + " covariance is not positive definite after jitter");
}

// Integral over [x0, x1] of exp(l(u)) and of u exp(l(u)) for l linear with
// endpoint values l0, l1 (shifted so that max l <= 0 keeps this in range).
std::pair<double, double> linear_exp_moments(double x0, double x1, double l0, double l1) {
    const double h = x1 - x0;
    if (!(h > 0.0)) {
        return {0.0, 0.0};
    }
    const bool anchor_left = l0 >= l1;
    const double la = anchor_left ? l0 : l1;
    const double z = -(std::abs(l1 - l0)); // decay over the cell, <= 0
    double phi1;
    double phi2;
    if (std::abs(z) < 1e-4) {
        phi1 = 1.0 + z / 2.0 + z * z / 6.0;
        phi2 = 0.5 + z / 3.0 + z * z / 8.0;
    } else {
        phi1 = std::expm1(z) / z;
        phi2 = (std::exp(z) * (z - 1.0) + 1.0) / (z * z);
    }
    const double ea = std::exp(la);
    const double mass = ea * h * phi1;
    const double first = anchor_left ? ea * (x0 * h * phi1 + h * h * phi2) : ea * (x1 * h * phi1 - h * h * phi2);
    return {mass, first};
}

double standard_normal_tail_ratio(double zeta) {
    // Integral over [-zeta, inf) of exp(-(u^2 - zeta^2) / 2), by Simpson.
    const double lo = -zeta;
    const double hi = std::max(lo, 0.0) + 12.0;
    const auto f = [zeta](double u) { return std::exp(-0.5 * (u - zeta) * (u + zeta)); };
    return detail::simpson(f, lo, hi, 4096);
}

double posterior_mean_on_grid(const std::vector<double>& grid, const std::vector<double>& log_z) {
    double peak = kNegInf;
    for (double v : log_z) {
        peak = std::max(peak, v);
    }
    double mass = 0.0;
    double first = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const auto [m, f] = linear_exp_moments(grid[i], grid[i + 1], log_z[i] - peak, log_z[i + 1] - peak);
        mass += m;
        first += f;
    }
    return std::clamp(first / mass, grid.front(), grid.back());
}

std::vector<double> symmetric_grid(double halfwidth, int points) {
    std::vector<double> grid(static_cast<std::size_t>(points));
    const int centre = (points - 1) / 2;
    for (int i = 0; i < points; ++i) {
        grid[static_cast<std::size_t>(i)] = halfwidth * static_cast<double>(i - centre) / centre;
    }
    return grid;
}

double draw_disc_fisher(const DiscFisherLimit& p, CounterEngine& engine, LimitKind which) {
    const double z_minus = engine.normal();
    const double z_plus = p.correlation * z_minus + std::sqrt(std::max(0.0, 1.0 - p.correlation * p.correlation)) *
                                                        engine.normal();
    const double s_minus = std::sqrt(p.info_minus);
    const double s_plus = std::sqrt(p.info_plus);
    if (which == LimitKind::mle) {
        if (z_minus < 0.0 && (z_plus < 0.0 || std::abs(z_minus) > std::abs(z_plus))) {
            return z_minus / s_minus;
        }
        if (z_minus > 0.0 && z_plus < 0.0) {
            return 0.0;
        }
        return z_plus / s_plus;
    }
    const double reach = p.grid_halfwidth / std::sqrt(std::min(p.info_minus, p.info_plus));
    const std::vector<double> grid = symmetric_grid(reach, p.grid_points);
    std::vector<double> log_z(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double u = grid[i];
        log_z[i] = u <= 0.0 ? u * z_minus * s_minus - 0.5 * u * u * p.info_minus
                            : u * z_plus * s_plus - 0.5 * u * u * p.info_plus;
    }
    return posterior_mean_on_grid(grid, log_z);
}

double draw_nonident(const NonidentLimit& p, CounterEngine& engine, LimitKind which) {
    const auto& roots = p.covariance.roots;
    const Eigen::Index k = static_cast<Eigen::Index>(roots.size());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(p.covariance.rho);
    const Eigen::VectorXd root_vals = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Eigen::VectorXd normals(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        normals(i) = engine.normal();
    }
    const Eigen::VectorXd zeta = eig.eigenvectors() * root_vals.asDiagonal() * normals;
    if (which == LimitKind::mle) {
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < k; ++i) {
            if (std::abs(zeta(i)) > std::abs(zeta(best))) {
                best = i;
            }
        }
        return roots[static_cast<std::size_t>(best)];
    }
    std::vector<double> logw(roots.size());
    double peak = kNegInf;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        logw[i] = std::log(p.prior_weights[i]) - 0.5 * std::log(p.covariance.informations[i]) +
                  0.5 * zeta(ii) * zeta(ii);
        peak = std::max(peak, logw[i]);
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < roots.size(); ++i) {
        const double w = std::exp(logw[i] - peak);
        num += w * roots[i];
        den += w;
    }
    return num / den;
}

double draw_cusp(const CuspParams& p, CounterEngine& engine, LimitKind which) {
    const auto sampler = symmetric_fbm_sampler(p.hurst, p.grid_halfwidth, p.grid_points);
    const std::vector<double> w = sampler->draw(engine);
    const std::vector<double>& grid = sampler->grid();
    std::vector<double> log_z(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        log_z[i] = w[i] - 0.5 * std::pow(std::abs(grid[i]), 2.0 * p.hurst);
    }
    // Standardized units v = Gamma^{1/H} u.
    const double unit = std::pow(p.gamma_sq, -0.5 / p.hurst);
    if (which == LimitKind::mle) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < grid.size(); ++i) {
            if (log_z[i] > log_z[best]) {
                best = i;
            }
        }
        return grid[best] * unit;
    }
    return posterior_mean_on_grid(grid, log_z) * unit;
}

} // namespace

std::string_view to_string(Regime regime) noexcept {
    switch (regime) {
    case Regime::regular: return "regular";
    case Regime::misspecified: return "misspecified";
    case Regime::nonidentifiable: return "nonidentifiable";
    case Regime::null_fisher: return "null-fisher";
    case Regime::disc_fisher: return "disc-fisher";
    case Regime::boundary: return "boundary";
    case Regime::cusp: return "cusp";
    case Regime::jump: return "jump";
    }
    return "unknown";
}

std::optional<Regime> parse_regime(std::string_view name) noexcept {
    for (Regime r : {Regime::regular, Regime::misspecified, Regime::nonidentifiable, Regime::null_fisher,
                     Regime::disc_fisher, Regime::boundary, Regime::cusp, Regime::jump}) {
        if (to_string(r) == name) {
            return r;
        }
    }
    return std::nullopt;
}

double default_rate_exponent(Regime regime) noexcept {
    switch (regime) {
    case Regime::null_fisher: return 1.0 / 6.0;
    case Regime::jump: return 1.0;
    case Regime::cusp: return 1.0 / 1.5;
    default: return 0.5;
    }
}

double cusp_gamma_sq(double a, double kappa, double lambda0) {
    if (!(kappa > 0.0 && kappa < 0.5) || !(lambda0 > 0.0)) {
        fail(ErrorKind::domain, "cusp constant needs kappa in (0, 1/2) and lambda0 > 0");
    }
    const double s = std::sin(2.0 * std::numbers::pi * kappa);
    return 4.0 * a * a * s * s * std::beta(1.0 + kappa, 1.0 + kappa) / (lambda0 * std::cos(std::numbers::pi * kappa));
}

RegimeLimit limit_params(Regime regime, const IntensityModel& model, double theta0,
                         const std::optional<TrueIntensity>& truth, const LimitOptions& options) {
    RegimeLimit out;
    out.regime = regime;
    out.rate_exponent = default_rate_exponent(regime);
    const ParameterInterval& interval = model.theta_interval();
    if (options.grid_points < 3 || options.grid_points % 2 == 0 || options.grid_points > 4001) {
        fail(ErrorKind::configuration, "limit grid_points must be odd and within [3, 4001]");
    }
    if (!(options.grid_halfwidth > 0.0)) {
        fail(ErrorKind::configuration, "limit grid_halfwidth must be positive");
    }
    switch (regime) {
    case Regime::regular: {
        const double info = fisher_information(model, theta0);
        if (!(info > 0.0)) {
            fail(ErrorKind::degenerate, "Fisher information vanishes at theta0");
        }
        out.params = RegularLimit{info};
        break;
    }
    case Regime::misspecified: {
        if (!truth) {
            fail(ErrorKind::precondition, "the misspecified regime needs a true intensity");
        }
        out.params = misspec_asymptotics(*truth, model);
        break;
    }
    case Regime::nonidentifiable: {
        NonidentLimit p;
        p.covariance = nonident_covariance(model, model.aliases(theta0));
        options.prior.validate(interval);
        for (double root : p.covariance.roots) {
            p.prior_weights.push_back(options.prior(root));
        }
        out.params = std::move(p);
        break;
    }
    case Regime::null_fisher: {
        const double i3 = higher_order_information(model, theta0, 3);
        if (!(i3 > 0.0)) {
            fail(ErrorKind::degenerate, "third-order information vanishes at theta0");
        }
        out.params = NullFisherLimit{i3};
        break;
    }
    case Regime::disc_fisher: {
        DiscFisherLimit p;
        p.info_minus = fisher_information(model, theta0, std::nullopt, Side::left);
        p.info_plus = fisher_information(model, theta0, std::nullopt, Side::right);
        if (!(p.info_minus > 0.0 && p.info_plus > 0.0)) {
            fail(ErrorKind::degenerate, "one-sided Fisher information vanishes at theta0");
        }
        p.correlation = score_correlation(model, theta0, Side::left, theta0, Side::right);
        p.grid_halfwidth = options.grid_halfwidth;
        p.grid_points = options.grid_points;
        out.params = p;
        break;
    }
    case Regime::boundary: {
        const double scale = std::max(1.0, std::abs(theta0));
        BoundaryLimit p;
        if (std::abs(theta0 - interval.alpha) <= 1e-12 * scale) {
            p.information = fisher_information(model, interval.alpha, std::nullopt, Side::right);
        } else if (std::abs(theta0 - interval.beta) <= 1e-12 * scale) {
            p.information = fisher_information(model, interval.beta, std::nullopt, Side::left);
            p.upper = true;
        } else {
            fail(ErrorKind::precondition, "the boundary regime needs theta0 on an endpoint of Theta");
        }
        if (!(p.information > 0.0)) {
            fail(ErrorKind::degenerate, "Fisher information vanishes at the boundary");
        }
        out.params = p;
        break;
    }
    case Regime::cusp: {
        const auto* cusp = dynamic_cast<const catalog::Cusp*>(&model);
        if (cusp == nullptr) {
            fail(ErrorKind::capability, "the cusp regime needs the CUSP model");
        }
        CuspParams p;
        p.kappa = cusp->kappa();
        p.hurst = p.kappa + 0.5;
        p.gamma_sq = cusp_gamma_sq(cusp->a(), cusp->kappa(), cusp->lambda0());
        if (!(p.gamma_sq > 0.0)) {
            fail(ErrorKind::degenerate, "cusp constant Gamma^2 is zero");
        }
        p.grid_halfwidth = options.grid_halfwidth;
        p.grid_points = options.grid_points;
        out.rate_exponent = 1.0 / (2.0 * p.hurst);
        out.params = p;
        break;
    }
    case Regime::jump: {
        const auto sizes = model.jump_at(theta0);
        if (!sizes) {
            fail(ErrorKind::capability, "model has no jump description at theta0");
        }
        if (!(sizes->lambda_minus > 0.0 && sizes->lambda_plus > 0.0) || sizes->lambda_minus == sizes->lambda_plus) {
            fail(ErrorKind::degenerate, "jump limit needs distinct positive one-sided intensities");
        }
        out.params = JumpLimit{*sizes, options.grid_halfwidth};
        break;
    }
    }
    return out;
}

double sample_limit(const RegimeLimit& limit, CounterEngine& engine, LimitKind which) {
    switch (limit.regime) {
    case Regime::regular:
        return engine.normal() / std::sqrt(std::get<RegularLimit>(limit.params).information);
    case Regime::misspecified:
        return engine.normal() * std::sqrt(std::get<MisspecAsymptotics>(limit.params).d_big_sq);
    case Regime::nonidentifiable:
        return draw_nonident(std::get<NonidentLimit>(limit.params), engine, which);
    case Regime::null_fisher: {
        if (which == LimitKind::bayes) {
            fail(ErrorKind::capability, "no Bayes limit law is available in the null-Fisher regime");
        }
        const double i3 = std::get<NullFisherLimit>(limit.params).information3;
        const double zeta = std::sqrt(i3) * engine.normal();
        return std::cbrt(zeta / i3);
    }
    case Regime::disc_fisher: {
        return draw_disc_fisher(std::get<DiscFisherLimit>(limit.params), engine, which);
    }
    case Regime::boundary: {
        const auto& p = std::get<BoundaryLimit>(limit.params);
        double value;
        if (which == LimitKind::mle) {
            const double zeta = std::sqrt(p.information) * engine.normal();
            value = zeta >= 0.0 ? zeta / p.information : 0.0;
        } else {
            const double z = engine.normal();
            value = (z + 1.0 / standard_normal_tail_ratio(z)) / std::sqrt(p.information);
        }
        return p.upper ? -value : value;
    }
    case Regime::cusp:
        return draw_cusp(std::get<CuspParams>(limit.params), engine, which);
    case Regime::jump: {
        const auto& p = std::get<JumpLimit>(limit.params);
        const JumpPath path(p.sizes, jump_horizon(p), engine);
        return which == LimitKind::mle ? path.argmax() : path.posterior_mean();
    }
    }
    fail(ErrorKind::capability, "unknown regime");
}

std::vector<double> sample_limits(const RegimeLimit& limit, LimitKind which, std::size_t count, std::uint64_t seed,
                                  int workers) {
    std::vector<double> out(count);
    parallel_for(count, workers, [&](std::size_t d) {
        CounterEngine engine(RngStream{seed, streams::limit_draw(d)});
        out[d] = sample_limit(limit, engine, which);
    });
    return out;
}

FbmSampler::FbmSampler(double hurst, std::vector<double> grid) : hurst_(hurst), grid_(std::move(grid)) {
    if (!(hurst > 0.0 && hurst < 1.0)) {
        fail(ErrorKind::domain, "Hurst parameter must lie in (0, 1)");
    }
    if (grid_.empty() || grid_.size() > 4001) {
        fail(ErrorKind::configuration, "fBm grid must have between 1 and 4001 points");
    }
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        if (grid_[i] != 0.0) {
            free_.push_back(i);
        }
    }
    const auto m = static_cast<Eigen::Index>(free_.size());
    Eigen::MatrixXd cov(m, m);
    const double two_h = 2.0 * hurst_;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double u = grid_[free_[static_cast<std::size_t>(i)]];
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double v = grid_[free_[static_cast<std::size_t>(j)]];
            const double c =
                0.5 * (std::pow(std::abs(u), two_h) + std::pow(std::abs(v), two_h) - std::pow(std::abs(u - v), two_h));
            cov(i, j) = c;
            cov(j, i) = c;
        }
    }
    if (m > 0) {
        factor_ = cholesky_with_jitter(cov, "fBm");
    }
}

std::vector<double> FbmSampler::draw(CounterEngine& engine) const {
    const auto m = static_cast<Eigen::Index>(free_.size());
    Eigen::VectorXd z(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        z(i) = engine.normal();
    }
    Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
    if (m > 0) {
        w.noalias() = factor_.triangularView<Eigen::Lower>() * z;
    }
    std::vector<double> out(grid_.size(), 0.0);
    for (Eigen::Index i = 0; i < m; ++i) {
        out[free_[static_cast<std::size_t>(i)]] = w(i);
    }
    return out;
}

std::shared_ptr<const FbmSampler> symmetric_fbm_sampler(double hurst, double halfwidth, int points) {
    static std::mutex mutex;
    static std::map<std::tuple<double, double, int>, std::shared_ptr<const FbmSampler>> cache;
    const auto key = std::make_tuple(hurst, halfwidth, points);
    std::lock_guard lock(mutex);
    auto it = cache.find(key);
    if (it == cache.end()) {
        if (points < 3 || points % 2 == 0) {
            fail(ErrorKind::configuration, "symmetric fBm grid needs an odd number of points");
        }
        it = cache.emplace(key, std::make_shared<const FbmSampler>(hurst, symmetric_grid(halfwidth, points))).first;
    }
    return it->second;
}

std::vector<double> simulate_fbm(double hurst, const std::vector<double>& grid, CounterEngine& engine) {
    return FbmSampler(hurst, grid).draw(engine);
}

double jump_horizon(const JumpLimit& limit) {
    const double lm = limit.sizes.lambda_minus;
    const double lp = limit.sizes.lambda_plus;
    const double ratio = std::log(lp / lm);
    // Expected decay of ln Z per unit |u| on each side.
    const double decay_plus = (lp - lm) - lm * ratio;
    const double decay_minus = lp * ratio - (lp - lm);
    return limit.halfwidth / std::min(decay_plus, decay_minus);
}

JumpPath::JumpPath(const JumpSizes& sizes, double u_max, CounterEngine& engine)
    : log_ratio_(std::log(sizes.lambda_plus / sizes.lambda_minus)),
      rate_gap_(sizes.lambda_plus - sizes.lambda_minus),
      u_max_(u_max) {
    if (!(u_max > 0.0)) {
        fail(ErrorKind::domain, "jump path horizon must be positive");
    }
    for (double t = engine.exponential(sizes.lambda_minus); t < u_max; t += engine.exponential(sizes.lambda_minus)) {
        positive_.push_back(t);
    }
    for (double t = engine.exponential(sizes.lambda_plus); t < u_max; t += engine.exponential(sizes.lambda_plus)) {
        negative_.push_back(t);
    }
}

double JumpPath::log_z(double u, Side side) const {
    if (u >= 0.0) {
        // right-continuous count on u > 0; Side::left excludes an event at u
        const auto count = side == Side::left
                               ? std::lower_bound(positive_.begin(), positive_.end(), u) - positive_.begin()
                               : std::upper_bound(positive_.begin(), positive_.end(), u) - positive_.begin();
        return log_ratio_ * static_cast<double>(count) - rate_gap_ * u;
    }
    const double a = -u;
    // moving left (Side::left) includes an event at |u|
    const auto count = side == Side::right
                           ? std::lower_bound(negative_.begin(), negative_.end(), a) - negative_.begin()
                           : std::upper_bound(negative_.begin(), negative_.end(), a) - negative_.begin();
    return -log_ratio_ * static_cast<double>(count) - rate_gap_ * u;
}

std::vector<JumpPath::Candidate> JumpPath::candidates() const {
    std::vector<Candidate> out;
    out.reserve(2 * (positive_.size() + negative_.size()) + 3);
    const double m = static_cast<double>(negative_.size());
    out.push_back({-u_max_, -log_ratio_ * m + rate_gap_ * u_max_});
    for (std::size_t k = negative_.size(); k-- > 0;) {
        const double e = negative_[k];
        const double kk = static_cast<double>(k);
        out.push_back({-e, std::max(-log_ratio_ * (kk + 1.0), -log_ratio_ * kk) + rate_gap_ * e});
    }
    out.push_back({0.0, 0.0});
    for (std::size_t k = 0; k < positive_.size(); ++k) {
        const double e = positive_[k];
        const double kk = static_cast<double>(k);
        out.push_back({e, std::max(log_ratio_ * kk, log_ratio_ * (kk + 1.0)) - rate_gap_ * e});
    }
    out.push_back({u_max_, log_ratio_ * static_cast<double>(positive_.size()) - rate_gap_ * u_max_});
    return out;
}

double JumpPath::argmax() const {
    const auto all = candidates();
    std::size_t best = 0;
    for (std::size_t i = 1; i < all.size(); ++i) {
        if (all[i].log_value > all[best].log_value) {
            best = i;
        }
    }
    return all[best].u;
}

double JumpPath::sup_log_z() const {
    double best = kNegInf;
    for (const auto& c : candidates()) {
        best = std::max(best, c.log_value);
    }
    return best;
}

double JumpPath::posterior_mean() const {
    const double peak = sup_log_z();
    double mass = 0.0;
    double first = 0.0;
    // Negative side: on (-e_{k+1}, -e_k) the count is k.
    double inner = 0.0;
    for (std::size_t k = 0; k <= negative_.size(); ++k) {
        const double outer = k < negative_.size() ? negative_[k] : u_max_;
        const double c = -log_ratio_ * static_cast<double>(k);
        const auto [ms, fs] = linear_exp_moments(-outer, -inner, c + rate_gap_ * outer - peak,
                                                 c + rate_gap_ * inner - peak);
        mass += ms;
        first += fs;
        inner = outer;
    }
    double lo = 0.0;
    for (std::size_t k = 0; k <= positive_.size(); ++k) {
        const double hi = k < positive_.size() ? positive_[k] : u_max_;
        const double c = log_ratio_ * static_cast<double>(k);
        const auto [ms, fs] = linear_exp_moments(lo, hi, c - rate_gap_ * lo - peak, c - rate_gap_ * hi - peak);
        mass += ms;
        first += fs;
        lo = hi;
    }
    return std::clamp(first / mass, -u_max_, u_max_);
}

} // namespace nrpp

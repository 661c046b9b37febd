#include "tractdim/tract_chart.hpp"

#include <algorithm>
#include <cmath>

#include "tractdim/parallel.hpp"
#include "tractdim/polyline.hpp"

namespace tractdim {

namespace {

// Every stride-th point of a chain, always keeping both ends.
Polyline decimate_chain(const Polyline& chain, std::size_t stride) {
    Polyline out;
    const std::size_t last = chain.size() - 1;
    for (std::size_t i = 0; i < last; i += stride) out.push_back(chain[i]);
    out.push_back(chain[last]);
    return out;
}

void append_segment(Polyline& out, cplx a, cplx b, int pieces) {
    // Points strictly between a and b.
    for (int j = 1; j < pieces; ++j) out.push_back(a + (b - a) * (double(j) / pieces));
}

}  // namespace

Polyline truncated_tract_polygon(const TractBoundary& tract, const TractMapOptions& options,
                                 std::size_t& zero_index, std::size_t& plus_index,
                                 std::size_t& minus_index) {
    if (tract.gamma1.size() < 2) throw Error(ErrorKind::Construction, "empty tract boundary");
    if (!(tract.k_min <= 0 && tract.k_max > 0)) {
        throw Error(ErrorKind::Construction, "tract levels must straddle 1");
    }
    const std::size_t edges = tract.gamma1.size() - 1;
    const std::size_t base =
        options.resolution > 0 ? (edges + options.resolution - 1) / options.resolution : 1;
    const std::size_t coarsest =
        std::max<std::size_t>(base, edges / std::max(1, options.min_copy_points));

    using Focus = TractMapOptions::Focus;
    auto stride_for = [&](int k, bool upper) -> std::size_t {
        const bool resolved = options.focus == Focus::Both || (options.focus == Focus::Upper) == upper;
        if (k == 1 && resolved) return base;
        std::size_t s = base * std::max(1, options.neighbor_stride);
        if (options.max_neighbor_points > 0) {
            s = std::max(s, (edges + options.max_neighbor_points - 1) / options.max_neighbor_points);
        }
        for (int j = 1; j < std::abs(k - 1) && s < coarsest; ++j) s *= 4;
        return std::min(s, std::max(base, coarsest));
    };

    // Upward chains from 2^{k_min} pi i to the top tip; the lower side is the
    // negative of the upper one.
    const double rho = std::ldexp(kPi, tract.k_max + 1);
    const cplx top(0.0, rho);
    auto chain = [&](bool upper, std::size_t& level1) {
        Polyline up;
        for (int k = tract.k_min; k <= tract.k_max; ++k) {
            if (k == 1) level1 = up.size();
            const Polyline copy = decimate_chain(tract.gamma1, stride_for(k, upper));
            const double scale = std::ldexp(1.0, k - 1);
            for (std::size_t i = 0; i + 1 < copy.size(); ++i) up.push_back(scale * copy[i]);
        }
        up.push_back(top);
        return up;
    };
    std::size_t level1 = 0, level1_low = 0;
    const Polyline up = chain(true, level1);
    const Polyline down = chain(false, level1_low);

    const double s = tract.side == Side::Right ? 1.0 : -1.0;
    const cplx c_top(2.0 * s * rho, rho);
    const cplx c_bot(2.0 * s * rho, -rho);
    const cplx cap(2.0 * s * rho, 0.0);
    constexpr int kCapPieces = 32;
    constexpr int kGraded = 10;

    Polyline poly;
    poly.push_back(cap);
    append_segment(poly, cap, c_top, kCapPieces / 2);
    poly.push_back(c_top);
    append_segment(poly, c_top, top, kCapPieces);
    // Down the upper ladder.
    for (std::size_t i = up.size(); i-- > 0;) {
        if (i == level1) plus_index = poly.size();
        poly.push_back(up[i]);
    }
    const cplx low = up.front();
    for (int j = 1; j <= kGraded; ++j) poly.push_back(low * std::ldexp(1.0, -j));
    zero_index = poly.size();
    poly.push_back(0.0);
    for (int j = kGraded; j >= 1; --j) poly.push_back(-low * std::ldexp(1.0, -j));
    for (std::size_t i = 0; i < down.size(); ++i) {
        if (i == level1_low) minus_index = poly.size();
        poly.push_back(-down[i]);
    }
    append_segment(poly, -top, c_bot, kCapPieces);
    poly.push_back(c_bot);
    append_segment(poly, c_bot, cap, kCapPieces / 2);
    return poly;
}

TractMap fit_tract_map(const TractBoundary& tract, const TractMapOptions& options) {
    TractMapOptions opt = options;
    Polyline poly;
    std::size_t zi = 0, pi = 0, mi = 0;
    for (;;) {
        poly = truncated_tract_polygon(tract, opt, zi, pi, mi);
        if (is_simple(poly, true)) break;
        if (opt.neighbor_stride <= 1 && opt.max_neighbor_points == 0) {
            throw Error(ErrorKind::Construction, "truncated tract polygon is not a Jordan curve");
        }
        if (opt.max_neighbor_points > 0) {
            opt.max_neighbor_points = opt.max_neighbor_points >= (1 << 20) ? 0 : 2 * opt.max_neighbor_points;
        } else {
            opt.neighbor_stride /= 2;
        }
    }
    const double rho = std::ldexp(kPi, tract.k_max + 1);
    const double s = tract.side == Side::Right ? 1.0 : -1.0;
    const cplx interior(s * rho, 0.0);
    if (!point_in_polygon(poly, interior)) {
        throw Error(ErrorKind::Construction, "truncation cap does not enclose the tract");
    }

    TractMap map;
    map.side_ = tract.side;
    map.rho_ = rho;
    auto zp = std::make_shared<Zipper>(Zipper::fit(poly, interior, 0));
    map.zipper_ = zp;
    map.x0_ = zp->vertex_image(zi);
    const double xp = zp->vertex_image(pi);
    const double xm = zp->vertex_image(mi);
    if (!(xp < map.x0_ && map.x0_ < xm) && !(xm < map.x0_ && map.x0_ < xp)) {
        throw Error(ErrorKind::Construction, "marked points not found in order on the boundary");
    }
    if (s > 0) {
        if (!(xp < map.x0_)) throw Error(ErrorKind::Construction, "tract side does not match orientation");
        map.lambda_ = map.x0_ - xp;
        map.a_plus_ = 1.0;
        map.a_minus_ = (xm - map.x0_) / map.lambda_;
    } else {
        if (!(xp > map.x0_)) throw Error(ErrorKind::Construction, "tract side does not match orientation");
        map.lambda_ = xp - map.x0_;
        map.a_minus_ = 1.0;
        map.a_plus_ = (map.x0_ - xm) / map.lambda_;
    }

    map.mu_ = estimate_mu(map);

    // The continued chart only uses the truncation inside one period; make sure
    // that region sits far from both cut-offs.
    const double a_hi = std::max(map.a_plus_, map.a_minus_) * map.mu();
    const double a_lo = std::min(map.a_plus_, map.a_minus_);
    const double inner = std::abs(tract.level_start(tract.k_min));
    for (int j = -3; j <= 3; ++j) {
        const cplx u = std::polar(1.0, 0.5 * j);
        if (std::abs(map.phi_direct(a_hi * u).value) > rho / 8.0) {
            throw Error(ErrorKind::Construction, "k_max too small for the fundamental period");
        }
        if (std::abs(map.phi_direct(a_lo * u).value) < 8.0 * inner) {
            throw Error(ErrorKind::Construction, "k_min too large for the fundamental period");
        }
    }
    return map;
}

Zipper::Eval TractMap::phi_direct(cplx zeta) const {
    const cplx w = x0_ + lambda_ * kI * zeta;
    const Zipper::Eval e = zipper_->from_half_plane(w);
    return {e.value, e.derivative * (lambda_ * kI)};
}

cplx TractMap::phi_inverse_direct(cplx z) const {
    const cplx w = zipper_->to_half_plane(z).value;
    return (w - x0_) / (lambda_ * kI);
}

Zipper::Eval TractMap::phi(cplx zeta) const {
    if (!(mu_.mu > 1.0)) throw Error(ErrorKind::Domain, "scaling multiplier not available");
    const double r = std::abs(zeta);
    if (r == 0.0) return phi_direct(zeta);
    const double a = zeta.imag() >= 0.0 ? a_plus_ : a_minus_;
    const int n = static_cast<int>(std::floor(std::log(r / a) / std::log(mu_.mu)));
    const Zipper::Eval e = phi_direct(zeta * std::pow(mu_.mu, -n));
    return {std::ldexp(1.0, n) * e.value, std::pow(2.0 / mu_.mu, n) * e.derivative};
}

int TractMap::level(cplx zeta) const {
    const double r = std::abs(zeta);
    if (r == 0.0 || !(mu_.mu > 1.0)) return 0;
    const double a = zeta.imag() >= 0.0 ? a_plus_ : a_minus_;
    return static_cast<int>(std::floor(std::log(r / a) / std::log(mu_.mu)));
}

void TractMap::phi(std::span<const cplx> zeta, std::span<Zipper::Eval> out) const {
    if (!(mu_.mu > 1.0)) throw Error(ErrorKind::Domain, "scaling multiplier not available");
    const double lmu = std::log(mu_.mu);
    std::vector<int> n(zeta.size());
    std::vector<cplx> w(zeta.size());
    for (std::size_t i = 0; i < zeta.size(); ++i) {
        const double r = std::abs(zeta[i]);
        const double a = zeta[i].imag() >= 0.0 ? a_plus_ : a_minus_;
        n[i] = r == 0.0 ? 0 : static_cast<int>(std::floor(std::log(r / a) / lmu));
        w[i] = x0_ + lambda_ * kI * (zeta[i] * std::pow(mu_.mu, -n[i]));
    }
    zipper_->from_half_plane(w, out);
    for (std::size_t i = 0; i < zeta.size(); ++i) {
        out[i].value *= std::ldexp(1.0, n[i]);
        out[i].derivative *= std::pow(2.0 / mu_.mu, n[i]) * (lambda_ * kI);
    }
}

MuEstimate estimate_mu(const TractMap& map, double tolerance) {
    std::vector<cplx> tests;
    for (double r : {1.0, 1.5}) {
        for (double th : {-1.3, -0.8, -0.3, 0.3, 0.8, 1.3}) {
            tests.push_back(map.base_radius(th > 0) * r * std::polar(1.0, th));
        }
    }
    std::vector<cplx> base(tests.size());
    for (std::size_t i = 0; i < tests.size(); ++i) base[i] = map.phi_direct(tests[i]).value;
    auto defect = [&](double mu) {
        double worst = 0.0;
        for (std::size_t i = 0; i < tests.size(); ++i) {
            const cplx v = map.phi_direct(mu * tests[i]).value;
            worst = std::max(worst, std::abs(0.5 * v - base[i]) / std::abs(base[i]));
        }
        return std::isfinite(worst) ? worst : INFINITY;
    };

    // Coarse logarithmic scan over (1, 20], then golden section in log mu.
    constexpr int kScan = 48;
    const double lo = std::log(1.0 + 1e-3);
    const double hi = std::log(20.0);
    int best = 0;
    double best_val = INFINITY;
    std::vector<double> xs(kScan + 1);
    for (int i = 0; i <= kScan; ++i) {
        xs[i] = lo + (hi - lo) * i / kScan;
        const double v = defect(std::exp(xs[i]));
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    double a = xs[std::max(0, best - 1)];
    double b = xs[std::min(kScan, best + 1)];
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - g * (b - a);
    double d = a + g * (b - a);
    double fc = defect(std::exp(c));
    double fd = defect(std::exp(d));
    while (b - a > 1e-5) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = defect(std::exp(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = defect(std::exp(d));
        }
    }
    MuEstimate est;
    est.mu = std::exp(0.5 * (a + b));
    est.residual = defect(est.mu);
    if (!(est.residual <= tolerance)) {
        throw Error(ErrorKind::NoConvergence,
                    "scaling multiplier defect " + std::to_string(est.residual) + " above tolerance");
    }
    return est;
}

Zipper::Eval TractChart::g(cplx z) const {
    const Zipper::Eval e = phi(R * z);
    return {e.value / diam, e.derivative * (R / diam)};
}

void TractChart::g(std::span<const cplx> z, std::span<Zipper::Eval> out) const {
    std::vector<cplx> zeta(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) zeta[i] = R * z[i];
    if (!lower) {
        map->phi(zeta, out);
    } else {
        // Evaluate each half-plane side with its own map.
        for (const bool upper : {true, false}) {
            std::vector<std::size_t> idx;
            std::vector<cplx> part;
            for (std::size_t i = 0; i < zeta.size(); ++i) {
                if ((zeta[i].imag() >= 0.0) == upper) {
                    idx.push_back(i);
                    part.push_back(zeta[i]);
                }
            }
            if (part.empty()) continue;
            std::vector<Zipper::Eval> res(part.size());
            (upper ? *map : *lower).phi(part, res);
            for (std::size_t j = 0; j < idx.size(); ++j) out[idx[j]] = res[j];
        }
    }
    for (auto& e : out) {
        e.value /= diam;
        e.derivative *= R / diam;
    }
}

TractChart fit_tract_chart(std::shared_ptr<const TractMap> map, double R, double kappa,
                           int samples_per_edge, std::shared_ptr<const TractMap> lower) {
    if (!(R >= 1.0)) throw Error(ErrorKind::InvalidParameter, "R must be at least 1");
    if (!(kappa > 0.0 && kappa < 1.0)) throw Error(ErrorKind::InvalidParameter, "kappa must lie in (0,1)");
    TractChart chart;
    chart.R = R;
    chart.kappa = kappa;
    chart.map = map;
    chart.lower = lower;
    const int n = std::max(8, samples_per_edge);

    // diam(phi(Q_R)) from the image of the boundary of Q_R.
    const cplx corners[4] = {cplx(0, -R), cplx(2 * R, -R), cplx(2 * R, R), cplx(0, R)};
    std::vector<cplx> image(4 * n);
    parallel_for(image.size(), [&](std::size_t i) {
        const int e = static_cast<int>(i) / n;
        const double t = double(i % n) / n;
        image[i] = chart.phi(corners[e] + (corners[(e + 1) % 4] - corners[e]) * t).value;
    });
    double diam = 0.0;
    for (std::size_t i = 0; i < image.size(); ++i)
        for (std::size_t j = i + 1; j < image.size(); ++j) diam = std::max(diam, std::abs(image[i] - image[j]));
    chart.diam = diam;

    // log|g| is harmonic on Q_1 \ closure(Q_kappa), so its extremes sit on the
    // boundary of that region.
    const cplx outer[4] = {cplx(0, -1), cplx(2, -1), cplx(2, 1), cplx(0, 1)};
    const cplx inner[4] = {cplx(0, -kappa), cplx(2 * kappa, -kappa), cplx(2 * kappa, kappa), cplx(0, kappa)};
    std::vector<cplx> pts;
    for (int e = 0; e < 3; ++e)
        for (int i = 0; i <= n; ++i) pts.push_back(outer[e] + (outer[e + 1] - outer[e]) * (double(i) / n));
    for (int e = 0; e < 3; ++e)
        for (int i = 0; i <= n; ++i) pts.push_back(inner[e] + (inner[e + 1] - inner[e]) * (double(i) / n));
    for (int i = 0; i <= n; ++i) {
        const double y = kappa + (1.0 - kappa) * i / n;
        pts.push_back(cplx(0, y));
        pts.push_back(cplx(0, -y));
    }
    std::vector<double> mod(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) { mod[i] = std::abs(chart.g(pts[i]).value); });
    const auto [lo, hi] = std::minmax_element(mod.begin(), mod.end());
    chart.m = *lo;
    chart.M = *lo > 0.0 ? *hi / *lo : INFINITY;
    if (!(chart.m > 1e-12)) {
        throw Error(ErrorKind::ChartRejected, "g vanishes away from the corner region");
    }
    return chart;
}

nlohmann::json TractMap::to_json() const {
    nlohmann::json j;
    j["kind"] = "tract";
    j["side"] = to_string(side_);
    j["x0"] = x0_;
    j["lambda"] = lambda_;
    j["a_plus"] = a_plus_;
    j["a_minus"] = a_minus_;
    j["rho"] = rho_;
    j["mu"] = mu_.mu;
    j["mu_residual"] = mu_.residual;
    j["zipper"] = zipper_->to_json();
    return j;
}

TractMap TractMap::from_json(const nlohmann::json& j) {
    if (j.value("kind", "") != "tract") throw Error(ErrorKind::Io, "record is not a tract chart");
    TractMap m;
    m.side_ = side_from_string(j.at("side").get<std::string>());
    m.x0_ = j.at("x0").get<double>();
    m.lambda_ = j.at("lambda").get<double>();
    m.a_plus_ = j.at("a_plus").get<double>();
    m.a_minus_ = j.at("a_minus").get<double>();
    m.rho_ = j.at("rho").get<double>();
    m.mu_.mu = j.at("mu").get<double>();
    m.mu_.residual = j.at("mu_residual").get<double>();
    m.zipper_ = std::make_shared<Zipper>(Zipper::from_json(j.at("zipper")));
    return m;
}

nlohmann::json TractChart::to_json() const {
    nlohmann::json j;
    j["R"] = R;
    j["kappa"] = kappa;
    j["diam"] = diam;
    j["m"] = m;
    j["M"] = M;
    return j;
}

}  // namespace tractdim

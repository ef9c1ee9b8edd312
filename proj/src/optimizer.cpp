#include "qspec/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace qspec
{
namespace
{
constexpr int kScanPoints = 2048;
constexpr int kPoleScanPoints = 256;
constexpr int kMaxCandidates = 16;
constexpr double kRootTol = 1e-10;
constexpr double kGoldenTol = 1e-12;
// Slopes are not trusted this close (in units of Gamma) to a pole.
constexpr double kSlopeExclusion = 1e-6;

// Unguarded partial-fraction chi over bright poles, used only when a root
// hides inside a guard band (very weakly coupled poles).
double chi_partial_fraction(const EmitterModel &model, double omega)
{
    double sum = 0.0;
    for (const Pole &p : model.poles())
        sum += p.weight / (omega - p.position);
    return 0.5 * model.rate() * sum;
}

// f decreasing through zero on [a, b]: f(a) > 0 > f(b). Bisection with secant
// steps, falling back to bisection whenever a step fails to halve the bracket.
double decreasing_root(const std::function<double(double)> &f, double a, double b, double fa, double fb, double tol)
{
    double best = std::abs(fa) < std::abs(fb) ? a : b;
    double best_res = std::min(std::abs(fa), std::abs(fb));
    bool force_bisect = false;
    for (int iter = 0; iter < 400; ++iter)
    {
        const double width = b - a;
        double x = a + fa * width / (fa - fb);
        if (force_bisect || !(x > a && x < b) || !std::isfinite(x))
            x = 0.5 * (a + b);
        const double fx = f(x);
        if (std::abs(fx) < best_res)
        {
            best = x;
            best_res = std::abs(fx);
        }
        if (fx == 0.0 || best_res <= 1e-3 * tol)
            break;
        if (fx > 0.0)
        {
            a = x;
            fa = fx;
        }
        else
        {
            b = x;
            fb = fx;
        }
        force_bisect = (b - a) > 0.5 * width;
        if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b)))
            break;
    }
    return best;
}

double golden_max(const std::function<double(double)> &f, double a, double b, double tol)
{
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int iter = 0; iter < 300 && (b - a) > tol; ++iter)
    {
        if (fc >= fd)
        {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        }
        else
        {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return fc >= fd ? c : d;
}

// Bisection on the sign of dX/domega around a golden-section estimate. Golden
// section alone cannot locate a quadratic extremum better than ~sqrt(eps).
double polish_with_slope(const EmitterModel &model, ParameterTag theta, double x, double halfwidth, bool is_max)
{
    const double sign = is_max ? 1.0 : -1.0;
    double a = x - halfwidth, b = x + halfwidth;
    const double exclusion = kSlopeExclusion * model.rate();
    for (const Pole &p : model.poles())
        if (p.position > a - exclusion && p.position < b + exclusion)
            return x;
    double sa = sign * response_slope(model, a, theta);
    double sb = sign * response_slope(model, b, theta);
    if (!(sa > 0.0 && sb < 0.0))
        return x;
    for (int iter = 0; iter < 200; ++iter)
    {
        const double m = 0.5 * (a + b);
        if (m <= a || m >= b)
            break;
        const double sm = sign * response_slope(model, m, theta);
        if (sm == 0.0)
            return m;
        (sm > 0.0 ? a : b) = m;
    }
    return 0.5 * (a + b);
}

double tail_envelope(const EmitterModel &model, ParameterTag theta, double window_lo, double window_hi)
{
    const double dist = std::min(model.min_eigenvalue() - window_lo, window_hi - model.max_eigenvalue());
    if (theta.is_gamma())
        return 1.0 / dist;
    double amp = 0.0;
    for (const Pole &p : model.poles())
        amp += std::abs(p.projected(theta.level() - 1));
    return model.rate() * amp * amp / (dist * dist);
}

} // namespace

BracketSet make_brackets(const EmitterModel &model, double margin)
{
    BracketSet out;
    const double extent = std::max(std::abs(model.min_eigenvalue()), std::abs(model.max_eigenvalue()));
    out.window_hi = extent + margin * model.rate();
    out.window_lo = -out.window_hi;
    const double guard = model.pole_guard() * (1.0 + 1e-6);
    for (const Pole &p : model.poles())
        out.poles.push_back(p.position);

    double lo = out.window_lo;
    bool lo_pole = false;
    for (double p : out.poles)
    {
        if (p - guard > lo)
            out.intervals.push_back({lo, p - guard, lo_pole, true});
        lo = p + guard;
        lo_pole = true;
    }
    if (out.window_hi > lo)
        out.intervals.push_back({lo, out.window_hi, lo_pole, false});
    return out;
}

std::vector<double> solve_chi_equals(const EmitterModel &model, double c)
{
    if (!std::isfinite(c) || c == 0.0)
        throw Error(Errc::InvalidParameter, "c_nonzero_finite", "solve_chi_equals needs a finite, nonzero target");
    const auto &poles = model.poles();
    if (poles.empty())
        throw Error(Errc::NoRootCertified, "bright_eigenstate",
                    "every eigenstate is orthogonal to |gamma>; chi vanishes identically");

    const double tol = kRootTol * std::max(1.0, std::abs(c));
    const double guard = model.pole_guard() * (1.0 + 1e-6);
    const double rate = model.rate();
    const std::function<double(double)> guarded = [&](double w) { return susceptibility(model, w) - c; };
    const std::function<double(double)> unguarded = [&](double w) { return chi_partial_fraction(model, w) - c; };

    std::vector<double> roots;
    const auto certify = [&](const std::function<double(double)> &f, double root) {
        if (!(std::abs(f(root)) <= tol))
            throw Error(Errc::NoRootCertified, "root_residual",
                        "root near " + std::to_string(root) + " misses chi = " + std::to_string(c) + " by more than tolerance");
        roots.push_back(root);
    };

    for (std::size_t k = 0; k + 1 < poles.size(); ++k)
    {
        double a = poles[k].position + guard, b = poles[k + 1].position - guard;
        if (a < b)
        {
            const double fa = guarded(a), fb = guarded(b);
            if (fa > 0.0 && fb < 0.0)
            {
                certify(guarded, decreasing_root(guarded, a, b, fa, fb, tol));
                continue;
            }
        }
        // The crossing sits inside a guard band: go right up to the poles.
        a = std::nextafter(poles[k].position, poles[k + 1].position);
        b = std::nextafter(poles[k + 1].position, poles[k].position);
        a = std::nextafter(a, b);
        b = std::nextafter(b, a);
        certify(unguarded, decreasing_root(unguarded, a, b, unguarded(a), unguarded(b), tol));
    }

    if (c > 0.0)
    {
        const double p = poles.back().position;
        const double a = p + guard;
        double step = rate;
        double b = p + step;
        int expand = 0;
        while (guarded(b) >= 0.0 && expand++ < 2000)
        {
            step *= 2.0;
            b = p + step;
        }
        const double fa = guarded(a);
        if (fa > 0.0)
            certify(guarded, decreasing_root(guarded, a, b, fa, guarded(b), tol));
        else
        {
            const double a0 = std::nextafter(std::nextafter(p, b), b);
            certify(unguarded, decreasing_root(unguarded, a0, b, unguarded(a0), unguarded(b), tol));
        }
    }
    else
    {
        const double p = poles.front().position;
        const double b = p - guard;
        double step = rate;
        double a = p - step;
        int expand = 0;
        while (guarded(a) <= 0.0 && expand++ < 2000)
        {
            step *= 2.0;
            a = p - step;
        }
        const double fb = guarded(b);
        if (fb < 0.0)
            certify(guarded, decreasing_root(guarded, a, b, guarded(a), fb, tol));
        else
        {
            const double b0 = std::nextafter(std::nextafter(p, a), a);
            certify(unguarded, decreasing_root(unguarded, a, b0, unguarded(a), unguarded(b0), tol));
        }
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

Extrema find_extrema(const EmitterModel &model, ParameterTag theta, const BracketSet &brackets)
{
    validate(model, theta);
    const double rate = model.rate();
    const double guard = model.pole_guard();

    std::vector<double> xs;
    for (const Interval &iv : brackets.intervals)
    {
        const double len = iv.hi - iv.lo;
        for (int k = 0; k <= kScanPoints; ++k)
            xs.push_back(iv.lo + len * static_cast<double>(k) / kScanPoints);
        // Geometric refinement from the guard band out to mid-interval.
        const double ratio = std::max(0.5 * len / guard, 1.0);
        for (int k = 0; k < kPoleScanPoints; ++k)
        {
            const double off = guard * std::pow(ratio, static_cast<double>(k) / (kPoleScanPoints - 1)) - guard;
            if (iv.lo_is_pole)
                xs.push_back(iv.lo + off);
            if (iv.hi_is_pole)
                xs.push_back(iv.hi - off);
        }
    }
    xs.insert(xs.end(), brackets.poles.begin(), brackets.poles.end());
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    std::vector<double> vs(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
        vs[i] = response(model, xs[i], theta);

    struct Seed
    {
        std::size_t index;
        bool is_max;
    };
    std::vector<Seed> maxima, minima;
    const std::size_t n = xs.size();
    for (std::size_t i = 0; i < n; ++i)
    {
        const double left = i > 0 ? vs[i - 1] : -std::numeric_limits<double>::infinity();
        const double right = i + 1 < n ? vs[i + 1] : -std::numeric_limits<double>::infinity();
        const double lmin = i > 0 ? vs[i - 1] : std::numeric_limits<double>::infinity();
        const double rmin = i + 1 < n ? vs[i + 1] : std::numeric_limits<double>::infinity();
        if (vs[i] >= left && vs[i] >= right && (vs[i] > left || vs[i] > right))
            maxima.push_back({i, true});
        if (vs[i] <= lmin && vs[i] <= rmin && (vs[i] < lmin || vs[i] < rmin))
            minima.push_back({i, false});
    }
    const auto keep_best = [&](std::vector<Seed> &seeds, bool is_max) {
        std::stable_sort(seeds.begin(), seeds.end(), [&](const Seed &l, const Seed &r) {
            return is_max ? vs[l.index] > vs[r.index] : vs[l.index] < vs[r.index];
        });
        if (seeds.size() > kMaxCandidates)
            seeds.resize(kMaxCandidates);
    };
    keep_best(maxima, true);
    keep_best(minima, false);

    Extrema out;
    out.window_lo = brackets.window_lo;
    out.window_hi = brackets.window_hi;
    const auto refine = [&](const Seed &s) {
        const std::size_t i = s.index;
        const double a = xs[i > 0 ? i - 1 : i];
        const double b = xs[i + 1 < n ? i + 1 : i];
        const double sign = s.is_max ? 1.0 : -1.0;
        ExtremaCandidate cand{xs[i], vs[i], s.is_max};
        if (b > a)
        {
            const auto f = [&](double w) { return sign * response(model, w, theta); };
            double x = golden_max(f, a, b, kGoldenTol * rate);
            x = polish_with_slope(model, theta, x, std::max(1e-6 * (b - a), 1e-9 * rate), s.is_max);
            const double v = response(model, x, theta);
            if (sign * v >= sign * cand.value)
                cand = {x, v, s.is_max};
            // Extrema sitting on a pole: the limit value there is exact.
            for (double p : brackets.poles)
            {
                if (p < a || p > b)
                    continue;
                const double vp = response(model, p, theta);
                if (sign * vp >= sign * cand.value - 1e-14 * std::abs(cand.value))
                    cand = {p, vp, s.is_max};
            }
        }
        out.candidates.push_back(cand);
    };
    for (const Seed &s : maxima)
        refine(s);
    for (const Seed &s : minima)
        refine(s);

    if (out.candidates.empty())
        throw Error(Errc::OptimizerFailure, "extremum_candidates", "scan produced no extremum candidates");

    const auto pick = [&](bool is_max, double &mu, double &omega) {
        bool found = false;
        for (const auto &c : out.candidates)
            if (c.is_max == is_max && (!found || (is_max ? c.value > mu : c.value < mu)))
            {
                mu = c.value;
                found = true;
            }
        if (!found)
        {
            // Monotone over the whole window: fall back to the scan's end points.
            const auto it = is_max ? std::max_element(vs.begin(), vs.end()) : std::min_element(vs.begin(), vs.end());
            mu = *it;
            omega = xs[static_cast<std::size_t>(it - vs.begin())];
            return;
        }
        const double tie = 1e-12 * std::max(std::abs(mu), 1e-300);
        std::vector<ExtremaCandidate> tied;
        for (const auto &c : out.candidates)
            if (c.is_max == is_max && std::abs(c.value - mu) <= tie)
                tied.push_back(c);
        std::sort(tied.begin(), tied.end(), [](const auto &l, const auto &r) { return l.omega < r.omega; });
        // Candidates closer than the cluster width belong to one flat extremum;
        // only the lowest-frequency cluster is kept.
        const double cluster = 1e-6 * rate;
        std::size_t end = 1;
        while (end < tied.size() && tied[end].omega - tied[end - 1].omega <= cluster)
            ++end;
        const double sign = is_max ? 1.0 : -1.0;
        omega = tied.front().omega;
        double best = tied.front().value;
        for (std::size_t k = 1; k < end; ++k)
            if (sign * tied[k].value > sign * best)
                omega = tied[k].omega, best = tied[k].value;
        for (double p : brackets.poles)
            if (p >= tied.front().omega - cluster && p <= tied[end - 1].omega + cluster &&
                std::abs(response(model, p, theta) - mu) <= tie)
            {
                omega = p;
                break;
            }
    };
    pick(true, out.mu_max, out.omega_max);
    pick(false, out.mu_min, out.omega_min);

    if (!theta.is_gamma())
    {
        out.mu_min = 0.0;
        out.omega_min = brackets.window_hi;
        out.min_at_infinity = true;
    }

    out.tail_envelope = tail_envelope(model, theta, brackets.window_lo, brackets.window_hi);
    const double slack = 1e-14 / rate;
    const bool certified = theta.is_gamma()
                               ? (out.tail_envelope <= out.mu_max + slack && -out.tail_envelope >= out.mu_min - slack)
                               : (out.tail_envelope <= out.mu_max + slack);
    if (!certified)
        throw Error(Errc::WindowInsufficient, "tail_envelope",
                    "response outside [" + std::to_string(brackets.window_lo) + ", " + std::to_string(brackets.window_hi) +
                        "] may exceed the extrema found inside (envelope " + std::to_string(out.tail_envelope) + ")");
    return out;
}

Extrema find_extrema(const EmitterModel &model, ParameterTag theta)
{
    double margin = 1e3;
    for (int attempt = 0;; ++attempt)
    {
        try
        {
            return find_extrema(model, theta, make_brackets(model, margin));
        }
        catch (const Error &e)
        {
            if (e.code() != Errc::WindowInsufficient || attempt >= 3)
                throw;
            margin *= 10.0;
        }
    }
}

nlohmann::json to_json(const BracketSet &brackets)
{
    nlohmann::json iv = nlohmann::json::array();
    for (const Interval &i : brackets.intervals)
        iv.push_back({{"lo", i.lo}, {"hi", i.hi}, {"lo_is_pole", i.lo_is_pole}, {"hi_is_pole", i.hi_is_pole}});
    return {{"window", {brackets.window_lo, brackets.window_hi}}, {"poles", brackets.poles}, {"intervals", iv}};
}

nlohmann::json to_json(const Extrema &e)
{
    nlohmann::json cands = nlohmann::json::array();
    for (const auto &c : e.candidates)
        cands.push_back({{"omega", c.omega}, {"value", c.value}, {"kind", c.is_max ? "max" : "min"}});
    return {{"mu_max", e.mu_max},
            {"omega_max", e.omega_max},
            {"mu_min", e.mu_min},
            {"omega_min", e.omega_min},
            {"min_at_infinity", e.min_at_infinity},
            {"tail_envelope", e.tail_envelope},
            {"window", {e.window_lo, e.window_hi}},
            {"candidates", cands}};
}

} // namespace qspec

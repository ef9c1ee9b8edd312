#include "qspec/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace qspec
{
namespace
{
using std::numbers::pi;

// Points per feature scale at the finest level, and growth rate of the local
// spacing with distance from a feature.
constexpr double kPointsPerScale = 32.0;
constexpr double kGrowth = 0.02;
constexpr double kEdgeOffset = 1e-10;
constexpr std::size_t kMinBudget = 512;

template <class... Ts>
struct overloaded : Ts...
{
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void bad_pulse(const std::string &field, const std::string &msg)
{
    throw Error(Errc::InvalidPulse, field, "invalid pulse: " + msg);
}

void require_positive(double value, const char *name)
{
    if (!(value > 0.0) || !std::isfinite(value))
        bad_pulse(name, std::string(name) + " must be positive and finite");
}

struct Feature
{
    double center;
    double scale;
};

// Jump discontinuity of the amplitude; `opens` is true at the lower edge of a support.
struct Edge
{
    double at;
    bool opens;
    double scale;
};

struct Layout
{
    std::vector<Feature> features;
    std::vector<Edge> edges;
    double max_spacing = std::numeric_limits<double>::infinity();
    std::vector<double> nodes; // forced grid points
};

Layout pulse_layout(const PulseSpec &spec)
{
    Layout out;
    std::visit(overloaded{
                   [&](const DeltaPair &p) {
                       out.features.push_back({p.omega_plus, p.kappa});
                       out.features.push_back({p.omega_minus, p.kappa});
                       if (p.reg == Regularization::Rectangular)
                           for (double c : {p.omega_plus, p.omega_minus})
                           {
                               out.edges.push_back({c - 0.5 * p.kappa, true, p.kappa});
                               out.edges.push_back({c + 0.5 * p.kappa, false, p.kappa});
                           }
                   },
                   [&](const GaussianPulse &p) { out.features.push_back({p.center, p.bandwidth}); },
                   [&](const RectangularPulse &p) {
                       out.features.push_back({p.center, p.width});
                       out.edges.push_back({p.center - 0.5 * p.width, true, p.width});
                       out.edges.push_back({p.center + 0.5 * p.width, false, p.width});
                   },
                   [&](const DecayingExp &p) { out.features.push_back({p.center, p.rate}); },
                   [&](const RisingExp &p) { out.features.push_back({p.center, p.rate}); },
                   [&](const TemporalBox &p) {
                       const double lobe = 2.0 * pi / p.duration;
                       out.features.push_back({p.center, lobe});
                       out.max_spacing = lobe / 16.0;
                   },
                   [&](const Tabulated &p) {
                       const auto &f = p.data->freqs;
                       double min_gap = f.back() - f.front();
                       for (std::size_t i = 1; i < f.size(); ++i)
                           min_gap = std::min(min_gap, f[i] - f[i - 1]);
                       out.features.push_back({0.5 * (f.front() + f.back()), 0.5 * (f.back() - f.front())});
                       out.max_spacing = std::max(min_gap, 1e-300);
                       out.nodes = f;
                   },
               },
               spec);
    return out;
}

cdouble interpolate(const TabulatedData &t, double omega)
{
    const auto &f = t.freqs;
    if (omega < f.front() || omega > f.back())
        return 0.0;
    auto it = std::upper_bound(f.begin(), f.end(), omega);
    if (it == f.end())
        return t.amps.back();
    const std::size_t hi = static_cast<std::size_t>(it - f.begin());
    const std::size_t lo = hi - 1;
    const double s = (omega - f[lo]) / (f[hi] - f[lo]);
    return (1.0 - s) * t.amps[lo] + s * t.amps[hi];
}

std::vector<double> trapezoid_weights(const std::vector<double> &x)
{
    const std::size_t n = x.size();
    std::vector<double> w(n, 0.0);
    if (n < 2)
        return w;
    w[0] = 0.5 * (x[1] - x[0]);
    w[n - 1] = 0.5 * (x[n - 1] - x[n - 2]);
    for (std::size_t i = 1; i + 1 < n; ++i)
        w[i] = 0.5 * (x[i + 1] - x[i - 1]);
    return w;
}

double local_spacing(const std::vector<Feature> &features, double cap, double omega)
{
    double h = cap;
    for (const Feature &f : features)
        h = std::min(h, std::max(f.scale / kPointsPerScale, kGrowth * std::abs(omega - f.center)));
    return h;
}

std::vector<double> march(const std::vector<Feature> &features, double cap, Window window, double refine)
{
    std::vector<double> pts;
    double omega = window.lo;
    while (omega < window.hi)
    {
        pts.push_back(omega);
        omega += local_spacing(features, cap, omega) / refine;
    }
    pts.push_back(window.hi);
    return pts;
}

} // namespace

const char *to_string(Regularization reg)
{
    switch (reg)
    {
    case Regularization::Lorentzian: return "lorentzian";
    case Regularization::Gaussian: return "gaussian";
    case Regularization::Rectangular: return "rectangular";
    }
    return "unknown";
}

Regularization parse_regularization(const std::string &text)
{
    std::string s = text;
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "lorentzian")
        return Regularization::Lorentzian;
    if (s == "gaussian")
        return Regularization::Gaussian;
    if (s == "rectangular")
        return Regularization::Rectangular;
    bad_pulse("regularization", "unknown regularization '" + text + "'");
}

double regularized_delta(Regularization reg, double kappa, double x)
{
    switch (reg)
    {
    case Regularization::Lorentzian: return kappa / (pi * (kappa * kappa + x * x));
    case Regularization::Gaussian: return std::exp(-x * x / (2.0 * kappa * kappa)) / (kappa * std::sqrt(2.0 * pi));
    case Regularization::Rectangular: return std::abs(x) <= 0.5 * kappa ? 1.0 / kappa : 0.0;
    }
    return 0.0;
}

double SampledField::norm_squared() const
{
    double sum = 0.0;
    for (std::size_t i = 0; i < freqs.size(); ++i)
        sum += weights[i] * std::norm(amps[i]);
    return sum;
}

void validate(const PulseSpec &spec)
{
    std::visit(overloaded{
                   [](const DeltaPair &p) {
                       require_positive(p.kappa, "kappa");
                       if (!std::isfinite(p.omega_plus) || !std::isfinite(p.omega_minus) || !std::isfinite(p.phase))
                           bad_pulse("omega_plus", "delta pair frequencies and phase must be finite");
                   },
                   [](const GaussianPulse &p) { require_positive(p.bandwidth, "bandwidth"); },
                   [](const RectangularPulse &p) { require_positive(p.width, "width"); },
                   [](const DecayingExp &p) { require_positive(p.rate, "rate"); },
                   [](const RisingExp &p) { require_positive(p.rate, "rate"); },
                   [](const TemporalBox &p) { require_positive(p.duration, "duration"); },
                   [](const Tabulated &p) {
                       if (!p.data || p.data->freqs.size() < 2 || p.data->freqs.size() != p.data->amps.size())
                           bad_pulse("tabulated", "tabulated pulse needs at least two (omega, amplitude) rows");
                       for (std::size_t i = 1; i < p.data->freqs.size(); ++i)
                           if (!(p.data->freqs[i] > p.data->freqs[i - 1]))
                               bad_pulse("tabulated", "tabulated frequencies must be strictly increasing");
                   },
               },
               spec);
}

std::string describe(const PulseSpec &spec)
{
    std::ostringstream os;
    os.precision(12);
    std::visit(overloaded{
                   [&](const DeltaPair &p) {
                       os << "DeltaPair(omega_plus=" << p.omega_plus << ", omega_minus=" << p.omega_minus
                          << ", kappa=" << p.kappa << ", reg=" << to_string(p.reg) << ", phase=" << p.phase << ")";
                   },
                   [&](const GaussianPulse &p) { os << "Gaussian(center=" << p.center << ", bandwidth=" << p.bandwidth << ")"; },
                   [&](const RectangularPulse &p) { os << "Rectangular(center=" << p.center << ", width=" << p.width << ")"; },
                   [&](const DecayingExp &p) { os << "DecayingExp(center=" << p.center << ", rate=" << p.rate << ")"; },
                   [&](const RisingExp &p) { os << "RisingExp(center=" << p.center << ", rate=" << p.rate << ")"; },
                   [&](const TemporalBox &p) { os << "TemporalBox(center=" << p.center << ", duration=" << p.duration << ")"; },
                   [&](const Tabulated &p) { os << "Tabulated(" << (p.data ? p.data->freqs.size() : 0) << " rows)"; },
               },
               spec);
    return os.str();
}

cdouble amplitude(const PulseSpec &spec, double omega)
{
    validate(spec);
    const cdouble i(0.0, 1.0);
    return std::visit(
        overloaded{
            [&](const DeltaPair &p) -> cdouble {
                const double upper = 0.5 * regularized_delta(p.reg, p.kappa, omega - p.omega_plus);
                const double lower = 0.5 * regularized_delta(p.reg, p.kappa, omega - p.omega_minus);
                return std::polar(std::sqrt(upper + lower), lower > upper ? p.phase : 0.0);
            },
            [&](const GaussianPulse &p) -> cdouble {
                const double d = omega - p.center;
                return std::pow(2.0 * pi * p.bandwidth * p.bandwidth, -0.25) *
                       std::exp(-d * d / (4.0 * p.bandwidth * p.bandwidth));
            },
            [&](const RectangularPulse &p) -> cdouble {
                return std::abs(omega - p.center) <= 0.5 * p.width ? 1.0 / std::sqrt(p.width) : 0.0;
            },
            [&](const DecayingExp &p) -> cdouble { return std::sqrt(p.rate / pi) / (p.rate - i * (omega - p.center)); },
            [&](const RisingExp &p) -> cdouble { return std::sqrt(p.rate / pi) / (p.rate + i * (omega - p.center)); },
            [&](const TemporalBox &p) -> cdouble {
                const double d = omega - p.center;
                const double x = 0.5 * d * p.duration;
                const double sinc = std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
                // (e^{i d T} - 1) / (i d) = T e^{i d T / 2} sinc(d T / 2)
                return std::sqrt(p.duration / (2.0 * pi)) * sinc * std::polar(1.0, x);
            },
            [&](const Tabulated &p) -> cdouble { return interpolate(*p.data, omega); },
        },
        spec);
}

cdouble time_amplitude(const PulseSpec &spec, double t)
{
    validate(spec);
    return std::visit(
        overloaded{
            [&](const GaussianPulse &p) -> cdouble {
                const double s2 = p.bandwidth * p.bandwidth;
                return std::pow(2.0 * s2 / pi, 0.25) * std::exp(-s2 * t * t) * std::polar(1.0, -p.center * t);
            },
            [&](const DecayingExp &p) -> cdouble {
                return t < 0.0 ? 0.0 : std::sqrt(2.0 * p.rate) * std::exp(-p.rate * t) * std::polar(1.0, -p.center * t);
            },
            [&](const RisingExp &p) -> cdouble {
                return t > 0.0 ? 0.0 : std::sqrt(2.0 * p.rate) * std::exp(p.rate * t) * std::polar(1.0, -p.center * t);
            },
            [&](const TemporalBox &p) -> cdouble {
                return (t < 0.0 || t > p.duration) ? 0.0 : std::polar(1.0 / std::sqrt(p.duration), -p.center * t);
            },
            [&](const auto &) -> cdouble {
                throw Error(Errc::InvalidPulse, "shape", "no closed-form time envelope for " + describe(spec));
            },
        },
        spec);
}

Window default_window(const EmitterModel &model, const PulseSpec &spec)
{
    validate(spec);
    const Layout layout = pulse_layout(spec);
    const double rate = model.rate();
    double lo = model.min_eigenvalue();
    double hi = model.max_eigenvalue();
    double scale = 0.0;
    for (const Feature &f : layout.features)
    {
        lo = std::min(lo, f.center);
        hi = std::max(hi, f.center);
        scale = std::max(scale, f.scale);
    }
    if (!layout.nodes.empty())
    {
        lo = std::min(lo, layout.nodes.front());
        hi = std::max(hi, layout.nodes.back());
    }
    return {lo - 25.0 * rate - 10.0 * scale, hi + 25.0 * rate + 10.0 * scale};
}

SampledField build_grid(const EmitterModel &model, const PulseSpec &spec, std::size_t budget)
{
    return build_grid(model, spec, default_window(model, spec), budget);
}

SampledField build_grid(const EmitterModel &model, const PulseSpec &spec, Window window, std::size_t budget)
{
    validate(spec);
    if (budget < kMinBudget)
        throw Error(Errc::InvalidParameter, "budget>=512", "grid budget must be at least 512 points");
    if (!(window.hi > window.lo) || !std::isfinite(window.lo) || !std::isfinite(window.hi))
        throw Error(Errc::WindowTooSmall, "window", "frequency window must be a finite, non-empty interval");

    Layout layout = pulse_layout(spec);
    const double rate = model.rate();
    const auto covered = [&](double lo, double hi) { return window.lo <= lo && hi <= window.hi; };
    if (!covered(model.min_eigenvalue() - 10.0 * rate, model.max_eigenvalue() + 10.0 * rate))
        throw Error(Errc::WindowTooSmall, "window_covers_spectrum",
                    "window must cover every eigenvalue of H_M by 10 Gamma on each side");
    for (const Feature &f : layout.features)
        if (!covered(f.center - 10.0 * f.scale, f.center + 10.0 * f.scale))
            throw Error(Errc::WindowTooSmall, "window_covers_pulse",
                        "window must cover each pulse feature by 10x its width (" + describe(spec) + ")");

    std::vector<Feature> features = layout.features;
    for (const Pole &p : model.poles())
        features.push_back({p.position, 0.5 * rate * std::max(p.weight, 1e-3)});

    const double cap = std::min((window.hi - window.lo) / static_cast<double>(kMinBudget), layout.max_spacing);
    const std::size_t base = march(features, cap, window, 1.0).size();
    double refine = std::max(1.0, static_cast<double>(budget) / static_cast<double>(base));
    std::vector<double> pts = march(features, cap, window, refine);
    while (pts.size() < budget)
    {
        refine *= 1.01 * static_cast<double>(budget) / static_cast<double>(pts.size());
        pts = march(features, cap, window, refine);
    }

    for (const Feature &f : features)
        pts.push_back(f.center);
    for (const Edge &e : layout.edges)
    {
        pts.push_back(e.at);
        pts.push_back(e.opens ? e.at - kEdgeOffset * e.scale : e.at + kEdgeOffset * e.scale);
    }
    pts.insert(pts.end(), layout.nodes.begin(), layout.nodes.end());
    std::erase_if(pts, [&](double x) { return x < window.lo || x > window.hi; });
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    SampledField field;
    field.freqs = std::move(pts);
    field.weights = trapezoid_weights(field.freqs);
    field.amps.reserve(field.freqs.size());
    for (double omega : field.freqs)
        field.amps.push_back(amplitude(spec, omega));
    return normalize(std::move(field));
}

SampledField normalize(SampledField field)
{
    const double norm2 = field.norm_squared();
    if (!(norm2 > 0.0) || !std::isfinite(norm2))
        throw Error(Errc::ZeroField, "nonzero_norm", "cannot normalize a field with zero or non-finite norm");
    const double scale = 1.0 / std::sqrt(norm2);
    for (cdouble &a : field.amps)
        a *= scale;
    return field;
}

Tabulated load_tabulated_csv(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(Errc::Config, "tabulated_path", "cannot open tabulated pulse file " + path.string());
    auto data = std::make_shared<TabulatedData>();
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        if (line.empty() || line[0] == '#')
            continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream row(line);
        double omega = 0.0, re = 0.0, im = 0.0;
        if (!(row >> omega >> re))
        {
            if (data->freqs.empty() && lineno == 1)
                continue; // header
            throw Error(Errc::Config, "tabulated_row", path.string() + ":" + std::to_string(lineno) + ": expected omega, re, im");
        }
        if (!(row >> im))
            im = 0.0;
        data->freqs.push_back(omega);
        data->amps.emplace_back(re, im);
    }
    Tabulated out{std::move(data)};
    validate(PulseSpec{out});
    return out;
}

PulseSpec pulse_from_json(const nlohmann::json &doc, const std::filesystem::path &base_dir)
{
    try
    {
        const std::string shape = doc.at("shape").get<std::string>();
        PulseSpec spec;
        if (shape == "delta_pair")
            spec = DeltaPair{doc.at("omega_plus").get<double>(), doc.at("omega_minus").get<double>(),
                             doc.at("kappa").get<double>(),
                             parse_regularization(doc.value("regularization", std::string("lorentzian"))),
                             doc.value("phase", 0.0)};
        else if (shape == "gaussian")
            spec = GaussianPulse{doc.value("center", 0.0), doc.at("bandwidth").get<double>()};
        else if (shape == "rectangular")
            spec = RectangularPulse{doc.value("center", 0.0), doc.at("width").get<double>()};
        else if (shape == "decaying_exp")
            spec = DecayingExp{doc.value("center", 0.0), doc.at("rate").get<double>()};
        else if (shape == "rising_exp")
            spec = RisingExp{doc.value("center", 0.0), doc.at("rate").get<double>()};
        else if (shape == "temporal_box")
            spec = TemporalBox{doc.value("center", 0.0), doc.at("duration").get<double>()};
        else if (shape == "tabulated")
        {
            std::filesystem::path p = doc.at("path").get<std::string>();
            if (p.is_relative() && !base_dir.empty())
                p = base_dir / p;
            spec = load_tabulated_csv(p);
        }
        else
            throw Error(Errc::Config, "shape", "unknown pulse shape '" + shape + "'");
        validate(spec);
        return spec;
    }
    catch (const nlohmann::json::exception &ex)
    {
        throw Error(Errc::Config, "pulse_schema", std::string("malformed pulse block: ") + ex.what());
    }
}

nlohmann::json pulse_to_json(const PulseSpec &spec)
{
    return std::visit(
        overloaded{
            [](const DeltaPair &p) -> nlohmann::json {
                return {{"shape", "delta_pair"}, {"omega_plus", p.omega_plus}, {"omega_minus", p.omega_minus},
                        {"kappa", p.kappa},      {"regularization", to_string(p.reg)}, {"phase", p.phase}};
            },
            [](const GaussianPulse &p) -> nlohmann::json {
                return {{"shape", "gaussian"}, {"center", p.center}, {"bandwidth", p.bandwidth}};
            },
            [](const RectangularPulse &p) -> nlohmann::json {
                return {{"shape", "rectangular"}, {"center", p.center}, {"width", p.width}};
            },
            [](const DecayingExp &p) -> nlohmann::json {
                return {{"shape", "decaying_exp"}, {"center", p.center}, {"rate", p.rate}};
            },
            [](const RisingExp &p) -> nlohmann::json {
                return {{"shape", "rising_exp"}, {"center", p.center}, {"rate", p.rate}};
            },
            [](const TemporalBox &p) -> nlohmann::json {
                return {{"shape", "temporal_box"}, {"center", p.center}, {"duration", p.duration}};
            },
            [](const Tabulated &p) -> nlohmann::json {
                return {{"shape", "tabulated"}, {"rows", p.data ? p.data->freqs.size() : 0}};
            },
        },
        spec);
}

} // namespace qspec

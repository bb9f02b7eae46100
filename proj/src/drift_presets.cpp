#include "driftlab/drift_presets.hpp"

#include "driftlab/error.hpp"
#include "driftlab/hash.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace driftlab {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

std::string format_amplitude(const std::string& name, double amplitude)
{
    std::ostringstream os;
    os.precision(17);
    os << name << "(amplitude=" << amplitude << ")";
    return os.str();
}

} // namespace

std::uint64_t DriftModel::hash() const
{
    Fnv1a h;
    h.update_value(dim);
    h.update(description);
    return h.digest();
}

const std::vector<std::string>& drift_preset_names()
{
    static const std::vector<std::string> names{"zero",          "constant",          "gradient_cos",
                                                "gradient_sum",  "divfree_perturbed", "trig"};
    return names;
}

DriftModel drift_preset(const std::string& name, int d, double amplitude)
{
    if (d < 1 || d > kMaxDim)
        throw ConfigError("drift dimension must be in [1,3], got " + std::to_string(d));
    if (!std::isfinite(amplitude))
        throw ConfigError("drift amplitude must be finite");

    DriftModel m;
    m.dim = d;
    m.description = format_amplitude(name, amplitude);
    const double A = amplitude;

    if (name == "zero") {
        m.description = "zero";
        m.field = {d, [](const Point&) { return Point{0, 0, 0}; }};
        m.potential = ScalarField{d, [](const Point&) { return 0.0; }};
    } else if (name == "constant") {
        m.field = {d, [A, d](const Point&) {
                       Point b{0, 0, 0};
                       for (int j = 0; j < d; ++j)
                           b[j] = A;
                       return b;
                   }};
    } else if (name == "gradient_cos") {
        m.field = {d, [A](const Point& x) { return Point{-kTwoPi * A * std::sin(kTwoPi * x[0]), 0, 0}; }};
        m.potential = ScalarField{d, [A](const Point& x) { return A * std::cos(kTwoPi * x[0]); }};
    } else if (name == "gradient_sum") {
        m.field = {d, [A, d](const Point& x) {
                       Point b{0, 0, 0};
                       for (int j = 0; j < d; ++j)
                           b[j] = -kTwoPi * A * std::sin(kTwoPi * x[j]);
                       return b;
                   }};
        m.potential = ScalarField{d, [A, d](const Point& x) {
                                      double s = 0.0;
                                      for (int j = 0; j < d; ++j)
                                          s += A * std::cos(kTwoPi * x[j]);
                                      return s;
                                  }};
    } else if (name == "divfree_perturbed") {
        if (d < 2)
            throw ConfigError("divfree_perturbed needs d >= 2");
        // div(e^{-2B} vbar e^{2B}) = div(vbar) = 0, so the perturbation keeps mu = e^{2B}/Z
        m.field = {d, [A](const Point& x) {
                       const double B = A * std::cos(kTwoPi * x[0]);
                       const double w = std::exp(-2 * B);
                       const double dpsi = 0.25 * A * kTwoPi * std::cos(kTwoPi * (x[0] + 2 * x[1]));
                       return Point{-kTwoPi * A * std::sin(kTwoPi * x[0]) + w * 2 * dpsi, -w * dpsi, 0};
                   }};
    } else if (name == "trig") {
        const double s = A / 0.5;
        m.field = {d, [s, d](const Point& x) {
                       Point b{0, 0, 0};
                       b[0] = 0.6 * std::sin(kTwoPi * x[0]) + 0.3 * std::cos(2 * kTwoPi * x[0]) + 0.2;
                       if (d >= 2) {
                           b[0] += 0.25 * std::cos(kTwoPi * x[1]);
                           b[1] = -0.4 * std::cos(kTwoPi * (x[0] + x[1])) + 0.1;
                       }
                       if (d >= 3) {
                           b[1] += 0.2 * std::sin(kTwoPi * x[2]);
                           b[2] = 0.3 * std::sin(kTwoPi * (x[0] - x[2])) - 0.15;
                       }
                       for (int j = 0; j < d; ++j)
                           b[j] *= s;
                       return b;
                   }};
    } else {
        std::string known;
        for (const auto& n : drift_preset_names())
            known += (known.empty() ? "" : ", ") + n;
        throw ConfigError("unknown drift preset '" + name + "' (known: " + known + ")");
    }
    return m;
}

DriftModel drift_from_coefficients(const CoefficientField& c)
{
    const int d = c.spec().dim();
    if (c.components() != d)
        throw ShapeError("drift coefficients need " + std::to_string(d) + " components, got " +
                         std::to_string(c.components()));
    DriftModel m;
    m.dim = d;
    Fnv1a h;
    h.update_value(c.spec().hash());
    h.update_value(static_cast<int>(c.coords()));
    h.update_doubles({c.values().data(), static_cast<std::size_t>(c.values().size())});
    std::ostringstream os;
    os << "coefficients(" << c.spec().describe() << ", hash=" << std::hex << h.digest() << ")";
    m.description = os.str();
    m.field = FieldEvaluator(c).as_vector_field();
    return m;
}

} // namespace driftlab

#include "risfl/channel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace risfl {

namespace {

constexpr double kCarrierWavelengthM = 0.1;  // sets deterministic LoS phases only

double distance(const Vec3& a, const Vec3& b) {
    const double dx = a[0] - b[0];
    const double dy = a[1] - b[1];
    const double dz = a[2] - b[2];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
}

}  // namespace

void ChannelParams::validate() const {
    if (bandwidth_hz <= 0.0) throw std::invalid_argument("ChannelParams: bandwidth must be positive");
    if (rice_factor < 0.0) throw std::invalid_argument("ChannelParams: rice factor must be >= 0");
    if (los_exponent <= 0.0 || nlos_exponent <= 0.0)
        throw std::invalid_argument("ChannelParams: path-loss exponents must be positive");
}

bool Box::blocks_segment(const Vec3& a, const Vec3& b) const {
    // Slab test; only interior crossings count, so endpoints sitting on a
    // face do not self-occlude.
    double t_enter = 0.0;
    double t_exit = 1.0;
    for (int axis = 0; axis < 3; ++axis) {
        const double d = b[axis] - a[axis];
        if (std::abs(d) < 1e-12) {
            if (a[axis] < lo[axis] || a[axis] > hi[axis]) return false;
            continue;
        }
        double t0 = (lo[axis] - a[axis]) / d;
        double t1 = (hi[axis] - a[axis]) / d;
        if (t0 > t1) std::swap(t0, t1);
        t_enter = std::max(t_enter, t0);
        t_exit = std::min(t_exit, t1);
        if (t_enter > t_exit) return false;
    }
    return t_exit - t_enter > 1e-9;
}

void Geometry::validate() const {
    if (car_positions.size() < 2) throw std::invalid_argument("Geometry: need at least 2 cars");
    if (ris_elements < 1 || ris_elements > 1024)
        throw std::invalid_argument("Geometry: ris_elements must lie in [1, 1024]");
    auto finite = [](const Vec3& p) {
        return std::isfinite(p[0]) && std::isfinite(p[1]) && std::isfinite(p[2]);
    };
    for (const auto& p : car_positions)
        if (!finite(p)) throw std::invalid_argument("Geometry: car position not finite");
    if (!finite(ris_position)) throw std::invalid_argument("Geometry: RIS position not finite");
}

bool Geometry::line_of_sight(const Vec3& a, const Vec3& b) const {
    for (const auto& box : obstructions)
        if (box.blocks_segment(a, b)) return false;
    return true;
}

ChannelSet ChannelSet::zero(int cars, int elements) {
    ChannelSet ch;
    ch.cars = cars;
    ch.elements = elements;
    ch.direct.assign(static_cast<std::size_t>(cars) * cars, Complex{0.0, 0.0});
    ch.car_to_ris.assign(cars, std::vector<Complex>(elements, Complex{0.0, 0.0}));
    ch.ris_to_car.assign(cars, std::vector<Complex>(elements, Complex{0.0, 0.0}));
    return ch;
}

void ChannelSet::set_direct(int i, int m, Complex h) {
    direct[static_cast<std::size_t>(i) * cars + m] = h;
    direct[static_cast<std::size_t>(m) * cars + i] = h;
}

PhaseShiftVector PhaseShiftVector::identity(int elements) {
    PhaseShiftVector phi;
    phi.coefficients.assign(elements, Complex{1.0, 0.0});
    return phi;
}

PhaseShiftVector PhaseShiftVector::from_phases(const std::vector<double>& radians) {
    PhaseShiftVector phi;
    phi.coefficients.reserve(radians.size());
    for (double r : radians) phi.coefficients.emplace_back(std::cos(r), std::sin(r));
    return phi;
}

double PhaseShiftVector::max_modulus_error() const {
    double worst = 0.0;
    for (const auto& c : coefficients) worst = std::max(worst, std::abs(std::abs(c) - 1.0));
    return worst;
}

void PhaseShiftVector::validate() const {
    const double err = max_modulus_error();
    if (err > 1e-9)
        throw std::invalid_argument("PhaseShiftVector: modulus deviates from 1 by " +
                                    std::to_string(err));
}

Complex project_unit(Complex raw) {
    const double r = std::abs(raw);
    if (r < 1e-12) return {1.0, 0.0};
    return raw / r;
}

namespace {

// sqrt(K/(K+1)) e^{j theta} + sqrt(1/(K+1)) CN(0,1); unit mean power for any K.
Complex rician_fading(double k_factor, double theta_los, Rng& rng) {
    const Complex scatter = rng.complex_normal();
    const double los_amp = std::sqrt(k_factor / (k_factor + 1.0));
    const double scatter_amp = std::sqrt(1.0 / (k_factor + 1.0));
    return los_amp * Complex{std::cos(theta_los), std::sin(theta_los)} + scatter_amp * scatter;
}

double path_amplitude(double dist_m, double exponent, double ref_loss_db) {
    const double loss_db = ref_loss_db + 10.0 * exponent * std::log10(dist_m);
    return std::pow(10.0, -loss_db / 20.0);
}

}  // namespace

ChannelSet sample_channels(const Geometry& geom, const ChannelParams& params, std::uint64_t seed) {
    geom.validate();
    params.validate();
    const int n = static_cast<int>(geom.car_positions.size());
    const int m_elems = geom.ris_elements;
    Rng rng(seed);
    ChannelSet ch = ChannelSet::zero(n, m_elems);

    auto sample_coef = [&](const Vec3& a, const Vec3& b, bool direct_link) {
        const double d = distance(a, b);
        if (d <= 0.0) throw std::invalid_argument("sample_channels: coincident positions");
        const bool los = geom.line_of_sight(a, b);
        const double exponent =
            (direct_link && !los) ? params.nlos_exponent : params.los_exponent;
        const double k_factor = los ? params.rice_factor : 0.0;
        const double theta_los = -2.0 * M_PI * d / kCarrierWavelengthM;
        return path_amplitude(d, exponent, params.ref_loss_db) *
               rician_fading(k_factor, theta_los, rng);
    };

    for (int i = 0; i < n; ++i)
        for (int m = i + 1; m < n; ++m)
            ch.set_direct(i, m, sample_coef(geom.car_positions[i], geom.car_positions[m], true));
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < m_elems; ++k)
            ch.car_to_ris[i][k] = sample_coef(geom.car_positions[i], geom.ris_position, false);
    for (int m = 0; m < n; ++m)
        for (int k = 0; k < m_elems; ++k)
            ch.ris_to_car[m][k] = sample_coef(geom.ris_position, geom.car_positions[m], false);
    return ch;
}

Complex effective_gain(const ChannelSet& ch, const PhaseShiftVector& phi, int i, int m) {
    if (i < 0 || m < 0 || i >= ch.cars || m >= ch.cars || i == m)
        throw std::invalid_argument("effective_gain: bad link (" + std::to_string(i) + "," +
                                    std::to_string(m) + ")");
    if (phi.size() != ch.elements)
        throw std::invalid_argument("effective_gain: phase vector length mismatch");
    Complex cascade{0.0, 0.0};
    for (int k = 0; k < ch.elements; ++k)
        cascade += std::conj(ch.ris_to_car[m][k]) * phi.coefficients[k] * ch.car_to_ris[i][k];
    return ch.direct_gain(i, m) + cascade;
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double rate_from_gain(Complex gain, const ChannelParams& params) {
    const double p = dbm_to_watts(params.tx_power_dbm);
    const double noise = dbm_to_watts(params.noise_power_dbm);
    const double snr = p * std::norm(gain) / noise;
    return params.bandwidth_hz * std::log2(1.0 + snr);
}

double link_rate(const ChannelSet& ch, const PhaseShiftVector& phi, int i, int m,
                 const ChannelParams& params) {
    return rate_from_gain(effective_gain(ch, phi, i, m), params);
}

DeconstructionResult deconstructive_phase(const ChannelSet& ch, int i, int m) {
    if (ch.elements != 1)
        throw std::invalid_argument(
            "deconstructive_phase: closed form requires M = 1; use direct_control for M > 1");
    const Complex cascade_gain = std::conj(ch.ris_to_car[m][0]) * ch.car_to_ris[i][0];
    const Complex h = ch.direct_gain(i, m);
    if (std::abs(cascade_gain) == 0.0)
        throw std::invalid_argument("deconstructive_phase: zero cascade channel, nothing to reflect");
    if (std::abs(h) == 0.0)
        throw std::invalid_argument(
            "deconstructive_phase: zero direct channel, nothing to cancel against");
    DeconstructionResult out;
    out.unconstrained = -h / cascade_gain;
    out.phi.coefficients = {project_unit(out.unconstrained)};
    out.residual = std::abs(h + cascade_gain * out.phi.coefficients[0]);
    return out;
}

DirectControlResult direct_control(const ChannelSet& ch, const LinkPlan& plan) {
    if (plan.deconstruct.empty())
        throw std::invalid_argument("direct_control: plan has no deconstructive links");
    for (const auto& [u, v] : plan.deconstruct)
        if (u < 0 || v < 0 || u >= ch.cars || v >= ch.cars)
            throw std::invalid_argument("direct_control: plan references unknown nodes");

    // Solve for the first deconstructive link; transmitter is the first node
    // of the pair.
    const auto [i, m] = plan.deconstruct.front();
    const Complex h = ch.direct_gain(i, m);
    std::vector<Complex> cascade(ch.elements);
    int usable = 0;
    for (int k = 0; k < ch.elements; ++k) {
        cascade[k] = std::conj(ch.ris_to_car[m][k]) * ch.car_to_ris[i][k];
        if (std::abs(cascade[k]) > 0.0) ++usable;
    }
    if (usable == 0)
        throw std::invalid_argument("direct_control: every cascade element is zero");

    DirectControlResult out;
    out.phi.coefficients.assign(ch.elements, Complex{1.0, 0.0});
    for (int k = 0; k < ch.elements; ++k) {
        if (std::abs(cascade[k]) == 0.0) continue;  // skipped, target spread over the rest
        const Complex x = -h / (static_cast<double>(usable) * cascade[k]);
        out.phi.coefficients[k] = project_unit(x);
    }
    for (const auto& link : plan.deconstruct) {
        out.residuals[link] =
            std::abs(effective_gain(ch, out.phi, link.first, link.second));
    }
    return out;
}

namespace {

void write_complex_row(std::ostringstream& out, const char* kind, int a, int b, int element,
                       Complex value) {
    out << kind << "," << a << "," << b << "," << element << "," << value.real() << ","
        << value.imag() << "\n";
}

}  // namespace

std::string ChannelSet::to_csv() const {
    std::ostringstream out;
    out.precision(17);
    out << "kind,a,b,element,re,im\n";
    for (int i = 0; i < cars; ++i)
        for (int m = i + 1; m < cars; ++m)
            write_complex_row(out, "direct", i, m, -1, direct_gain(i, m));
    for (int i = 0; i < cars; ++i)
        for (int k = 0; k < elements; ++k)
            write_complex_row(out, "car_to_ris", i, -1, k, car_to_ris[i][k]);
    for (int m = 0; m < cars; ++m)
        for (int k = 0; k < elements; ++k)
            write_complex_row(out, "ris_to_car", m, -1, k, ris_to_car[m][k]);
    return out.str();
}

ChannelSet ChannelSet::from_csv(std::istream& in) {
    struct Row {
        std::string kind;
        int a, b, element;
        Complex value;
    };
    std::vector<Row> rows;
    std::string line;
    bool header = true;
    int max_car = -1, max_elem = -1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (header) {
            header = false;
            continue;
        }
        std::istringstream ls(line);
        Row row;
        std::string cell;
        std::getline(ls, row.kind, ',');
        std::getline(ls, cell, ',');
        row.a = std::stoi(cell);
        std::getline(ls, cell, ',');
        row.b = std::stoi(cell);
        std::getline(ls, cell, ',');
        row.element = std::stoi(cell);
        std::getline(ls, cell, ',');
        const double re = std::stod(cell);
        std::getline(ls, cell, ',');
        row.value = Complex{re, std::stod(cell)};
        max_car = std::max({max_car, row.a, row.b});
        max_elem = std::max(max_elem, row.element);
        rows.push_back(std::move(row));
    }
    ChannelSet ch = ChannelSet::zero(max_car + 1, max_elem + 1);
    for (const auto& row : rows) {
        if (row.kind == "direct")
            ch.set_direct(row.a, row.b, row.value);
        else if (row.kind == "car_to_ris")
            ch.car_to_ris[row.a][row.element] = row.value;
        else if (row.kind == "ris_to_car")
            ch.ris_to_car[row.a][row.element] = row.value;
        else
            throw std::invalid_argument("ChannelSet::from_csv: unknown kind '" + row.kind + "'");
    }
    return ch;
}

ChannelSet ChannelSet::from_csv(const std::string& text) {
    std::istringstream in(text);
    return from_csv(in);
}

}  // namespace risfl

#pragma once

// Transfer-matrix reflectance/transmittance of lossless multilayers at
// normal incidence, plus a fast evaluator for stacks whose two trailing
// layers are being optimized.

#include <complex>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <vector>

#include "core.hpp"
#include "errors.hpp"

namespace subsql {

// Characteristic matrix [[cos d, i sin d / n], [i n sin d, cos d]].
struct TransferMatrix {
    std::complex<double> m11{1.0, 0.0}, m12{0.0, 0.0};
    std::complex<double> m21{0.0, 0.0}, m22{1.0, 0.0};

    TransferMatrix operator*(const TransferMatrix& o) const {
        return {m11 * o.m11 + m12 * o.m21, m11 * o.m12 + m12 * o.m22,
                m21 * o.m11 + m22 * o.m21, m21 * o.m12 + m22 * o.m22};
    }

    std::complex<double> determinant() const { return m11 * m22 - m12 * m21; }
};

inline TransferMatrix layer_matrix(double n, double t_nm, double lambda_nm) {
    if (lambda_nm <= 0.0) throw arg_error("layer_matrix: lambda must be > 0");
    if (n < 1.0) throw arg_error("layer_matrix: n must be >= 1");
    if (t_nm < 0.0) throw arg_error("layer_matrix: t must be >= 0");
    const double delta = 2.0 * std::numbers::pi * n * t_nm / lambda_nm;
    const double c = std::cos(delta), s = std::sin(delta);
    return {{c, 0.0}, {0.0, s / n}, {0.0, n * s}, {c, 0.0}};
}

struct RT {
    double R;
    double T;
};

namespace detail {

inline std::complex<double> amplitude_r(const TransferMatrix& m, double n_in, double n_ex) {
    const std::complex<double> B = m.m11 + m.m12 * n_ex;
    const std::complex<double> C = m.m21 + m.m22 * n_ex;
    return (n_in * B - C) / (n_in * B + C);
}

inline std::complex<double> amplitude_t(const TransferMatrix& m, double n_in, double n_ex) {
    const std::complex<double> B = m.m11 + m.m12 * n_ex;
    const std::complex<double> C = m.m21 + m.m22 * n_ex;
    return 2.0 * n_in / (n_in * B + C);
}

inline TransferMatrix product(const Stack& stack, double lambda_nm) {
    TransferMatrix m;  // identity
    for (const Layer& l : stack.layers)
        m = m * layer_matrix(l.material.refr_index, l.thickness_nm, lambda_nm);
    return m;
}

} // namespace detail

// R from the admittance formula; lossless stacks carry T = 1 - R.
inline RT stack_rt(const Stack& stack, double lambda_nm) {
    if (lambda_nm <= 0.0) throw arg_error("stack_rt: lambda must be > 0");
    stack.validate();
    const auto r = detail::amplitude_r(detail::product(stack, lambda_nm),
                                       stack.incident_index, stack.exit_index);
    double R = std::norm(r);
    if (R < 0.0) R = 0.0;
    if (R > 1.0) R = 1.0;
    return {R, 1.0 - R};
}

// Independent transmittance through the exit admittance; used to assert
// energy conservation rather than assume it.
inline double transmittance_direct(const Stack& stack, double lambda_nm) {
    if (lambda_nm <= 0.0) throw arg_error("transmittance_direct: lambda must be > 0");
    stack.validate();
    const auto t = detail::amplitude_t(detail::product(stack, lambda_nm),
                                       stack.incident_index, stack.exit_index);
    return (stack.exit_index / stack.incident_index) * std::norm(t);
}

inline double transmission_ppm(const Stack& stack, double lambda_nm) {
    return 1e6 * stack_rt(stack, lambda_nm).T;
}

struct ReflectanceSpectrum {
    std::vector<double> wavelengths_nm;  // ascending
    std::vector<double> R;
    std::vector<double> T;
};

inline ReflectanceSpectrum spectrum(const Stack& stack, double lambda_min_nm,
                                    double lambda_max_nm, int n_points) {
    if (!(lambda_min_nm < lambda_max_nm))
        throw arg_error("spectrum: need lambda_min < lambda_max");
    if (lambda_min_nm <= 0.0) throw arg_error("spectrum: lambda_min must be > 0");
    if (n_points < 2) throw arg_error("spectrum: need n_points >= 2");
    ReflectanceSpectrum s;
    s.wavelengths_nm.reserve(n_points);
    s.R.reserve(n_points);
    s.T.reserve(n_points);
    const double step = (lambda_max_nm - lambda_min_nm) / (n_points - 1);
    for (int i = 0; i < n_points; ++i) {
        const double lam = lambda_min_nm + i * step;
        const RT rt = stack_rt(stack, lam);
        s.wavelengths_nm.push_back(lam);
        s.R.push_back(rt.R);
        s.T.push_back(rt.T);
    }
    return s;
}

inline void write_spectrum_csv(const ReflectanceSpectrum& s, std::ostream& out) {
    out << "wavelength_nm,R,T\n";
    char buf[128];
    for (std::size_t i = 0; i < s.wavelengths_nm.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12e,%.12e,%.12e\n", s.wavelengths_nm[i],
                      s.R[i], s.T[i]);
        out << buf;
    }
}

inline void write_spectrum_csv(const ReflectanceSpectrum& s, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open '" + path + "' for writing");
    write_spectrum_csv(s, f);
    if (!f.good()) throw io_error("write failed for '" + path + "'");
}

// Precomputed product of every layer except the two trailing ones, so a
// (t1, t2) candidate costs two layer matrices instead of the whole stack.
class SupportPairEvaluator {
public:
    SupportPairEvaluator(const Stack& templ, double lambda0_nm)
        : lambda_(lambda0_nm) {
        if (lambda0_nm <= 0.0)
            throw arg_error("SupportPairEvaluator: lambda must be > 0");
        templ.validate();
        if (templ.layers.size() < 2)
            throw stack_error("SupportPairEvaluator: stack needs at least 2 layers");
        const std::size_t n = templ.layers.size();
        Stack prefix_stack = templ;
        prefix_stack.layers.resize(n - 2);
        prefix_ = detail::product(prefix_stack, lambda_);
        n1_ = templ.layers[n - 2].material.refr_index;
        n2_ = templ.layers[n - 1].material.refr_index;
        n_in_ = templ.incident_index;
        n_ex_ = templ.exit_index;
    }

    double ppm(double t1_nm, double t2_nm) const {
        const TransferMatrix m =
            prefix_ * layer_matrix(n1_, t1_nm, lambda_) * layer_matrix(n2_, t2_nm, lambda_);
        double R = std::norm(detail::amplitude_r(m, n_in_, n_ex_));
        if (R < 0.0) R = 0.0;
        if (R > 1.0) R = 1.0;
        return 1e6 * (1.0 - R);
    }

private:
    TransferMatrix prefix_;
    double n1_, n2_, n_in_, n_ex_, lambda_;
};

} // namespace subsql

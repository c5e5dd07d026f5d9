// SPDX-License-Identifier: Apache-2.0
//
// prdoa: partial-relaxation direction-of-arrival estimation
// Copyright (C) 2026 The prdoa authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef PRDOA_ARRAY_MODEL_HPP
#define PRDOA_ARRAY_MODEL_HPP

#include "errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace prdoa
{
    using cplx = std::complex<double>;
    using Position = std::array<double, 3>; // x, y, z in carrier wavelengths

    inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
    inline double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

    // SNR = 1 / noise power for unit-power sources
    inline double noise_power_from_snr_db(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

    // Sensor positions in wavelengths. Directions are azimuth angles in the x-y plane,
    // measured from broadside (the y axis), so a linear array lies along x.
    class ArrayGeometry
    {
    public:
        explicit ArrayGeometry(std::vector<Position> positions) : positions_(std::move(positions))
        {
            if (positions_.size() < 2)
                throw InvalidArgument("ArrayGeometry: at least 2 sensors are required");
            for (const auto &p : positions_)
                for (double c : p)
                    if (!std::isfinite(c))
                        throw InvalidArgument("ArrayGeometry: sensor positions must be finite");
        }

        // Uniform linear array along x, first sensor at the origin
        static ArrayGeometry ula(std::size_t sensors, double spacing = 0.5)
        {
            if (!std::isfinite(spacing) || spacing <= 0.0)
                throw InvalidArgument("ArrayGeometry::ula: spacing must be positive");
            std::vector<Position> pos(sensors);
            for (std::size_t m = 0; m < sensors; ++m)
                pos[m] = {static_cast<double>(m) * spacing, 0.0, 0.0};
            return ArrayGeometry(std::move(pos));
        }

        std::size_t size() const { return positions_.size(); }
        const std::vector<Position> &positions() const { return positions_; }

    private:
        std::vector<Position> positions_;
    };

    // a(theta)_m = exp(j 2 pi <p_m, u(theta)>),  u(theta) = (sin theta, cos theta, 0)
    inline Eigen::VectorXcd steering_vector(const ArrayGeometry &geometry, double theta_deg)
    {
        if (!std::isfinite(theta_deg))
            throw InvalidArgument("steering_vector: angle must be finite");
        const double th = deg_to_rad(theta_deg);
        const double ux = std::sin(th), uy = std::cos(th);
        const auto &pos = geometry.positions();
        Eigen::VectorXcd a(static_cast<Eigen::Index>(pos.size()));
        for (std::size_t m = 0; m < pos.size(); ++m)
        {
            const double phase = 2.0 * std::numbers::pi * (pos[m][0] * ux + pos[m][1] * uy);
            a(static_cast<Eigen::Index>(m)) = std::polar(1.0, phase);
        }
        return a;
    }

    // Columns are steering vectors for each angle
    inline Eigen::MatrixXcd steering_matrix(const ArrayGeometry &geometry, std::span<const double> angles_deg)
    {
        Eigen::MatrixXcd A(static_cast<Eigen::Index>(geometry.size()), static_cast<Eigen::Index>(angles_deg.size()));
        for (std::size_t i = 0; i < angles_deg.size(); ++i)
            A.col(static_cast<Eigen::Index>(i)) = steering_vector(geometry, angles_deg[i]);
        return A;
    }

    struct Scenario
    {
        std::vector<double> doas;          // degrees, strictly increasing
        std::vector<double> source_powers; // one per source, >= 0
        cplx correlation{0.0, 0.0};        // between consecutive sources, |rho| <= 1
        double noise_power = 1.0;
        std::size_t snapshots = 1;
        std::uint64_t seed = 0;

        std::size_t n_sources() const { return doas.size(); }

        void validate(const ArrayGeometry &geometry) const
        {
            if (doas.empty())
                throw InvalidScenario("scenario: at least one source is required");
            if (doas.size() >= geometry.size())
                throw InvalidScenario("scenario: number of sources must be smaller than number of sensors");
            if (source_powers.size() != doas.size())
                throw InvalidScenario("scenario: one power per source is required");
            for (std::size_t n = 0; n < doas.size(); ++n)
            {
                if (!std::isfinite(doas[n]))
                    throw InvalidScenario("scenario: DOAs must be finite");
                if (n > 0 && !(doas[n] > doas[n - 1]))
                    throw InvalidScenario("scenario: DOAs must be strictly increasing");
                if (!std::isfinite(source_powers[n]) || source_powers[n] < 0.0)
                    throw InvalidScenario("scenario: source powers must be nonnegative");
            }
            if (!(std::abs(correlation) <= 1.0 + 1e-15))
                throw InvalidScenario("scenario: |correlation| must not exceed 1");
            if (!std::isfinite(noise_power) || noise_power <= 0.0)
                throw InvalidScenario("scenario: noise power must be positive");
            if (snapshots < 1)
                throw InvalidScenario("scenario: at least one snapshot is required");
        }
    };

    struct SnapshotMatrix
    {
        Eigen::MatrixXcd data; // M x T
        Eigen::MatrixXcd sources; // N x T waveforms used to build data

        Eigen::Index sensors() const { return data.rows(); }
        Eigen::Index snapshots() const { return data.cols(); }
    };

    // X = A S + N with circular Gaussian sources and noise.
    // Consecutive sources are mixed as s_{n+1} = rho s_n + sqrt(1 - |rho|^2) w before power scaling.
    inline SnapshotMatrix generate_snapshots(const ArrayGeometry &geometry, const Scenario &scenario)
    {
        scenario.validate(geometry);
        const auto M = static_cast<Eigen::Index>(geometry.size());
        const auto N = static_cast<Eigen::Index>(scenario.n_sources());
        const auto T = static_cast<Eigen::Index>(scenario.snapshots);

        std::mt19937_64 rng(scenario.seed);
        std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
        auto cn = [&]() { return cplx(normal(rng), normal(rng)); };

        const cplx rho = scenario.correlation;
        const double innovation = std::sqrt(std::max(0.0, 1.0 - std::norm(rho)));

        Eigen::MatrixXcd unit(N, T);
        for (Eigen::Index t = 0; t < T; ++t)
            for (Eigen::Index n = 0; n < N; ++n)
            {
                const cplx w = cn();
                unit(n, t) = n == 0 ? w : rho * unit(n - 1, t) + innovation * w;
            }

        SnapshotMatrix out;
        out.sources.resize(N, T);
        for (Eigen::Index n = 0; n < N; ++n)
            out.sources.row(n) = std::sqrt(scenario.source_powers[static_cast<std::size_t>(n)]) * unit.row(n);

        const Eigen::MatrixXcd A = steering_matrix(geometry, scenario.doas);
        out.data = A * out.sources;
        const double noise_scale = std::sqrt(scenario.noise_power);
        for (Eigen::Index t = 0; t < T; ++t)
            for (Eigen::Index m = 0; m < M; ++m)
                out.data(m, t) += noise_scale * cn();
        return out;
    }

    // Hermitian sample covariance with its eigendecomposition, eigenvalues descending
    class SampleCovariance
    {
    public:
        SampleCovariance(const Eigen::MatrixXcd &r_hat, std::size_t n_sources)
            : r_hat_(0.5 * (r_hat + r_hat.adjoint())), n_sources_(n_sources)
        {
            if (r_hat.rows() != r_hat.cols() || r_hat.rows() < 2)
                throw InvalidArgument("SampleCovariance: square matrix of size >= 2 required");
            if (n_sources_ < 1 || n_sources_ >= static_cast<std::size_t>(r_hat.rows()))
                throw InvalidArgument("SampleCovariance: need 1 <= N < M");
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> evd(r_hat_);
            if (evd.info() != Eigen::Success)
                throw std::runtime_error("SampleCovariance: eigendecomposition failed");
            eig_values_ = evd.eigenvalues().reverse();
            eig_vectors_ = evd.eigenvectors().rowwise().reverse();
        }

        const Eigen::MatrixXcd &r_hat() const { return r_hat_; }
        const Eigen::VectorXd &eig_values() const { return eig_values_; }
        const Eigen::MatrixXcd &eig_vectors() const { return eig_vectors_; }
        std::size_t n_sources() const { return n_sources_; }
        Eigen::Index size() const { return r_hat_.rows(); }

        auto signal_vectors() const { return eig_vectors_.leftCols(static_cast<Eigen::Index>(n_sources_)); }
        auto noise_vectors() const { return eig_vectors_.rightCols(size() - static_cast<Eigen::Index>(n_sources_)); }
        auto signal_values() const { return eig_values_.head(static_cast<Eigen::Index>(n_sources_)); }
        auto noise_values() const { return eig_values_.tail(size() - static_cast<Eigen::Index>(n_sources_)); }

        // Number of eigenvalues above tol * lambda_max
        Eigen::Index rank(double tol = 1e-12) const
        {
            const double thr = tol * std::max(eig_values_(0), 0.0);
            Eigen::Index r = 0;
            for (Eigen::Index k = 0; k < eig_values_.size(); ++k)
                r += eig_values_(k) > thr ? 1 : 0;
            return r;
        }

        bool is_singular(double tol = 1e-12) const { return rank(tol) < size(); }

        // R + gamma I; eigenvectors are shared, eigenvalues shift exactly by gamma
        SampleCovariance loaded(double gamma) const
        {
            SampleCovariance out(*this);
            out.r_hat_.diagonal().array() += gamma;
            out.eig_values_.array() += gamma;
            return out;
        }

    private:
        Eigen::MatrixXcd r_hat_;
        Eigen::VectorXd eig_values_;
        Eigen::MatrixXcd eig_vectors_;
        std::size_t n_sources_;
    };

    // R = X X^H / T
    inline SampleCovariance sample_covariance(const SnapshotMatrix &x, std::size_t n_sources)
    {
        if (x.snapshots() < 1)
            throw InvalidArgument("sample_covariance: at least one snapshot is required");
        Eigen::MatrixXcd r = x.data * x.data.adjoint() / static_cast<double>(x.snapshots());
        return SampleCovariance(r, n_sources);
    }

    inline SampleCovariance diagonal_load(const SampleCovariance &r, double gamma)
    {
        if (!std::isfinite(gamma) || gamma < 0.0)
            throw InvalidArgument("diagonal_load: loading factor must be nonnegative");
        if (gamma == 0.0)
            return r;
        return r.loaded(gamma);
    }
}

#endif

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

#ifndef PRDOA_ESTIMATORS_HPP
#define PRDOA_ESTIMATORS_HPP

// Null-spectra over a direction grid. Minima of each spectrum locate the sources.
//
//   bf      tr(R) - a^H R a / |a|^2
//   capon   a^H R^-1 a
//   music   a^H Un Un^H a / |a|^2
//   pr-dml  sum_{k>=N} lambda_k(P_a^perp R)
//   pr-wsf  sum_{k>=N} lambda_k(P_a^perp Us W Us^H)
//   pr-ccf  sum_{k>=N} lambda_k^2(R - s_C a a^H),  s_C = 1 / (a^H R^-1 a)
//   pr-ucf  min_{s >= 0} sum_{k>=N} lambda_k^2(R - s a a^H)
//
// The partial-relaxation spectra have a fast path that only needs the N-1 principal (or, for
// pr-wsf, the smallest of N) eigenvalues of a rank-one modified diagonal matrix in the eigenbasis
// of R, and a naive path that runs a dense Hermitian EVD per direction.

#include "array_model.hpp"
#include "errors.hpp"
#include "rank_one_eig.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace prdoa
{
    enum class Estimator
    {
        Beamformer,
        Capon,
        Music,
        PrDml,
        PrWsf,
        PrCcf,
        PrUcf,
        DmlGrid2
    };

    inline std::string_view estimator_name(Estimator e)
    {
        switch (e)
        {
        case Estimator::Beamformer: return "bf";
        case Estimator::Capon: return "capon";
        case Estimator::Music: return "music";
        case Estimator::PrDml: return "pr-dml";
        case Estimator::PrWsf: return "pr-wsf";
        case Estimator::PrCcf: return "pr-ccf";
        case Estimator::PrUcf: return "pr-ucf";
        case Estimator::DmlGrid2: return "dml-grid2";
        }
        return "?";
    }

    inline Estimator parse_estimator(std::string_view name)
    {
        for (Estimator e : {Estimator::Beamformer, Estimator::Capon, Estimator::Music, Estimator::PrDml,
                            Estimator::PrWsf, Estimator::PrCcf, Estimator::PrUcf, Estimator::DmlGrid2})
            if (estimator_name(e) == name)
                return e;
        throw InvalidArgument("unknown estimator '" + std::string(name) + "'");
    }

    // True for estimators with a separate naive (dense EVD) path
    inline bool has_naive_path(Estimator e)
    {
        return e == Estimator::PrDml || e == Estimator::PrWsf || e == Estimator::PrCcf || e == Estimator::PrUcf;
    }

    enum class Path
    {
        Fast,
        Naive
    };

    // Direction grid with cached steering vectors (columns of `steering`)
    struct SteeringGrid
    {
        std::vector<double> angles; // degrees
        Eigen::MatrixXcd steering;  // M x G
        Eigen::VectorXd norm2;      // |a|^2 per direction

        SteeringGrid(const ArrayGeometry &geometry, std::vector<double> angles_deg)
            : angles(std::move(angles_deg)), steering(steering_matrix(geometry, angles)),
              norm2(steering.colwise().squaredNorm().transpose())
        {
            if (angles.empty())
                throw InvalidArgument("SteeringGrid: grid must not be empty");
        }

        Eigen::Index size() const { return steering.cols(); }
        Eigen::Index sensors() const { return steering.rows(); }
    };

    // n points lo + i (hi - lo) / n, i = 0..n-1 (half-open, so integer-step targets lie on the grid)
    inline std::vector<double> uniform_grid(double lo, double hi, std::size_t n)
    {
        if (!std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo) || n < 1)
            throw InvalidArgument("uniform_grid: need finite lo < hi and n >= 1");
        std::vector<double> g(n);
        const double step = (hi - lo) / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i)
            g[i] = lo + static_cast<double>(i) * step;
        return g;
    }

    struct SpectrumResult
    {
        std::vector<double> grid;
        std::vector<double> values;
        Estimator estimator = Estimator::Beamformer;
        std::vector<int> iterations;      // secular iterations per direction
        std::vector<int> bisection_steps; // pr-ucf only
        std::size_t failures = 0;         // directions set to +inf
        bool loaded = false;              // covariance was diagonally loaded internally
    };

    struct SpectrumOptions
    {
        Path path = Path::Fast;
        bool warm_start = true;          // reuse roots of the previous direction as starting points
        SecularOptions secular{};
        double auto_loading = 1e-4;      // applied when pr-ccf/capon meet a singular covariance
        double ucf_init_left = 1e-6;
        double ucf_tolerance = 1e-8;     // relative bracket width
        int ucf_max_expansions = 200;
    };

    struct WsfWeighting
    {
        Eigen::VectorXd w;        // diagonal of W in the signal eigenbasis
        double sigma_n_hat = 0.0; // mean of the M-N smallest eigenvalues

        static WsfWeighting identity(std::size_t n)
        {
            return {Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n)), 0.0};
        }
    };

    // w_k = (lambda_k - sigma_n)^2 / lambda_k, clamped to 0 below the noise floor
    inline WsfWeighting wsf_weighting(const SampleCovariance &r)
    {
        WsfWeighting out;
        out.sigma_n_hat = std::max(0.0, r.noise_values().mean());
        const auto ls = r.signal_values();
        out.w.resize(ls.size());
        for (Eigen::Index k = 0; k < ls.size(); ++k)
        {
            const double lam = ls(k);
            const double gap = lam - out.sigma_n_hat;
            out.w(k) = (gap > 0.0 && lam > 0.0) ? gap * gap / lam : 0.0;
        }
        return out;
    }

    namespace detail
    {
        inline SpectrumResult make_result(const SteeringGrid &grid, Estimator e)
        {
            SpectrumResult res;
            res.grid = grid.angles;
            res.estimator = e;
            res.values.assign(static_cast<std::size_t>(grid.size()), 0.0);
            res.iterations.assign(static_cast<std::size_t>(grid.size()), 0);
            return res;
        }

        // |U^H a|^2 for every direction: M x G
        inline Eigen::MatrixXd projected_power(const Eigen::MatrixXcd &U, const SteeringGrid &grid)
        {
            return (U.adjoint() * grid.steering).cwiseAbs2();
        }

        inline Eigen::VectorXd clamped_eigenvalues(const SampleCovariance &r)
        {
            return r.eig_values().cwiseMax(0.0);
        }

        inline Eigen::MatrixXcd orth_projector(const Eigen::VectorXcd &a)
        {
            const auto M = a.size();
            return Eigen::MatrixXcd::Identity(M, M) - a * a.adjoint() / a.squaredNorm();
        }

        inline void require_invertible(const SampleCovariance &r)
        {
            if (r.is_singular())
                throw SingularCovariance("covariance is singular; apply diagonal_load() first");
        }

        inline double sum_tail(const Eigen::VectorXd &desc, Eigen::Index from, bool squared)
        {
            double acc = 0.0;
            for (Eigen::Index k = from; k < desc.size(); ++k)
                acc += squared ? desc(k) * desc(k) : desc(k);
            return acc;
        }
    }

    inline SpectrumResult beamformer_spectrum(const SampleCovariance &r, const SteeringGrid &grid)
    {
        auto res = detail::make_result(grid, Estimator::Beamformer);
        const double tr = r.r_hat().trace().real();
        const Eigen::MatrixXcd RA = r.r_hat() * grid.steering;
        for (Eigen::Index g = 0; g < grid.size(); ++g)
        {
            const double aRa = grid.steering.col(g).dot(RA.col(g)).real();
            res.values[static_cast<std::size_t>(g)] = tr - aRa / grid.norm2(g);
        }
        return res;
    }

    // 1 / (a^H R^-1 a)
    inline double capon_power(const SampleCovariance &r, const Eigen::VectorXcd &a)
    {
        detail::require_invertible(r);
        const Eigen::VectorXd p = (r.eig_vectors().adjoint() * a).cwiseAbs2();
        return 1.0 / (p.array() / r.eig_values().array()).sum();
    }

    // a^H R^-1 a, the reciprocal Capon power
    inline SpectrumResult capon_spectrum(const SampleCovariance &r, const SteeringGrid &grid)
    {
        detail::require_invertible(r);
        auto res = detail::make_result(grid, Estimator::Capon);
        const Eigen::MatrixXd P = detail::projected_power(r.eig_vectors(), grid);
        const Eigen::ArrayXd inv = r.eig_values().array().inverse();
        for (Eigen::Index g = 0; g < grid.size(); ++g)
            res.values[static_cast<std::size_t>(g)] = (P.col(g).array() * inv).sum();
        return res;
    }

    inline SpectrumResult music_spectrum(const SampleCovariance &r, const SteeringGrid &grid)
    {
        auto res = detail::make_result(grid, Estimator::Music);
        const Eigen::MatrixXcd Un = r.noise_vectors();
        const Eigen::MatrixXd P = detail::projected_power(Un, grid);
        for (Eigen::Index g = 0; g < grid.size(); ++g)
            res.values[static_cast<std::size_t>(g)] = P.col(g).sum() / grid.norm2(g);
        return res;
    }

    inline SpectrumResult pr_dml_spectrum(const SampleCovariance &r, const SteeringGrid &grid, const SpectrumOptions &opt = {})
    {
        auto res = detail::make_result(grid, Estimator::PrDml);
        const auto N = static_cast<Eigen::Index>(r.n_sources());
        const auto M = r.size();

        if (opt.path == Path::Naive)
        {
            for (Eigen::Index g = 0; g < grid.size(); ++g)
            {
                const Eigen::MatrixXcd P = detail::orth_projector(grid.steering.col(g));
                const Eigen::VectorXd ev = dense_eigenvalues(P * r.r_hat() * P);
                res.values[static_cast<std::size_t>(g)] = detail::sum_tail(ev, N - 1, false);
            }
            return res;
        }

        // lambda_k(P_a^perp R) = lambda_k(L - L^{1/2} U^H a a^H U L^{1/2} / |a|^2)
        const Eigen::VectorXd lam = detail::clamped_eigenvalues(r);
        const double tr = lam.sum();
        const Eigen::MatrixXd P = detail::projected_power(r.eig_vectors(), grid);
        RankOneEigensolver solver(std::span<const double>(lam.data(), static_cast<std::size_t>(M)), opt.secular);
        solver.set_warm_start(opt.warm_start);
        const auto L = static_cast<std::size_t>(N - 1);
        std::vector<double> w(static_cast<std::size_t>(M)), roots(L);
        for (Eigen::Index g = 0; g < grid.size(); ++g)
        {
            double aRa = 0.0;
            for (Eigen::Index j = 0; j < M; ++j)
            {
                w[static_cast<std::size_t>(j)] = lam(j) * P(j, g);
                aRa += w[static_cast<std::size_t>(j)];
            }
            double principal = 0.0;
            int iters = 0;
            if (L > 0)
            {
                solver.solve(1.0 / grid.norm2(g), w, L, Which::Largest, roots);
                for (std::size_t k = 0; k < L; ++k)
                {
                    principal += roots[k];
                    iters += solver.last_iterations()[k];
                }
            }
            res.values[static_cast<std::size_t>(g)] = tr - aRa / grid.norm2(g) - principal;
            res.iterations[static_cast<std::size_t>(g)] = iters;
        }
        return res;
    }

    inline SpectrumResult pr_wsf_spectrum(const SampleCovariance &r, const WsfWeighting &weighting, const SteeringGrid &grid,
                                          const SpectrumOptions &opt = {})
    {
        auto res = detail::make_result(grid, Estimator::PrWsf);
        const auto N = static_cast<Eigen::Index>(r.n_sources());
        if (weighting.w.size() != N)
            throw InvalidArgument("pr_wsf_spectrum: weighting size must equal the number of sources");
        const Eigen::MatrixXcd Us = r.signal_vectors();

        if (opt.path == Path::Naive)
        {
            const Eigen::MatrixXcd Y = Us * weighting.w.cast<cplx>().asDiagonal() * Us.adjoint();
            for (Eigen::Index g = 0; g < grid.size(); ++g)
            {
                const Eigen::MatrixXcd P = detail::orth_projector(grid.steering.col(g));
                const Eigen::VectorXd ev = dense_eigenvalues(P * Y * P);
                res.values[static_cast<std::size_t>(g)] = detail::sum_tail(ev, N - 1, false);
            }
            return res;
        }

        // lambda_N(W - W^{1/2} Us^H a a^H Us W^{1/2} / |a|^2), an N x N problem
        const Eigen::MatrixXd P = detail::projected_power(Us, grid);
        RankOneEigensolver solver(std::span<const double>(weighting.w.data(), static_cast<std::size_t>(N)), opt.secular);
        solver.set_warm_start(opt.warm_start);
        std::vector<double> w(static_cast<std::size_t>(N)), root(1);
        for (Eigen::Index g = 0; g < grid.size(); ++g)
        {
            for (Eigen::Index j = 0; j < N; ++j)
                w[static_cast<std::size_t>(j)] = weighting.w(j) * P(j, g);
            solver.solve(1.0 / grid.norm2(g), w, 1, Which::Smallest, root);
            res.values[static_cast<std::size_t>(g)] = root[0];
            res.iterations[static_cast<std::size_t>(g)] = solver.last_iterations()[0];
        }
        return res;
    }

    inline SpectrumResult pr_wsf_spectrum(const SampleCovariance &r, const SteeringGrid &grid, const SpectrumOptions &opt = {})
    {
        return pr_wsf_spectrum(r, wsf_weighting(r), grid, opt);
    }

    inline SpectrumResult pr_ccf_spectrum(const SampleCovariance &r_in, const SteeringGrid &grid, const SpectrumOptions &opt = {})
    {
        const bool load = r_in.is_singular();
        const SampleCovariance r = load ? diagonal_load(r_in, opt.auto_loading) : r_in;
        auto res = detail::make_result(grid, Estimator::PrCcf);
        res.loaded = load;
        const auto N = static_cast<Eigen::Index>(r.n_sources());
        const auto M = r.size();
        const Eigen::VectorXd &lam = r.eig_values();
        const Eigen::MatrixXd P = detail::projected_power(r.eig_vectors(), grid);

        if (opt.path == Path::Naive)
        {
            for (Eigen::Index g = 0; g < grid.size(); ++g)
            {
                const double s = 1.0 / (P.col(g).array() / lam.array()).sum();
                const Eigen::VectorXcd a = grid.steering.col(g);
                const Eigen::VectorXd ev = dense_eigenvalues(Eigen::MatrixXcd(r.r_hat() - s * a * a.adjoint()));
                res.values[static_cast<std::size_t>(g)] = detail::sum_tail(ev, N - 1, true);
            }
            return res;
        }

        // tr(R^2) - 2 s a^H R a + s^2 |a|^4 - sum_{k<N} lambda_k^2(L - s z z^H),  z = U^H a
        const double trR2 = lam.squaredNorm();
        RankOneEigensolver solver(std::span<const double>(lam.data(), static_cast<std::size_t>(M)), opt.secular);
        solver.set_warm_start(opt.warm_start);
        const auto L = static_cast<std::size_t>(N - 1);
        std::vector<double> w(static_cast<std::size_t>(M)), roots(L);
        for (Eigen::Index g = 0; g < grid.size(); ++g)
        {
            double inv = 0.0, aRa = 0.0;
            for (Eigen::Index j = 0; j < M; ++j)
            {
                w[static_cast<std::size_t>(j)] = P(j, g);
                inv += P(j, g) / lam(j);
                aRa += lam(j) * P(j, g);
            }
            const double s = 1.0 / inv;
            const double a2 = grid.norm2(g);
            double principal = 0.0;
            int iters = 0;
            if (L > 0)
            {
                solver.solve(s, w, L, Which::Largest, roots);
                for (std::size_t k = 0; k < L; ++k)
                {
                    principal += roots[k] * roots[k];
                    iters += solver.last_iterations()[k];
                }
            }
            res.values[static_cast<std::size_t>(g)] = trR2 - 2.0 * s * aRa + s * s * a2 * a2 - principal;
            res.iterations[static_cast<std::size_t>(g)] = iters;
        }
        return res;
    }

    // Per-direction state of the unconstrained covariance-fitting minimization
    struct UcfState
    {
        double sigma_left = 0.0;
        double sigma_right = 0.0;
        double sigma_hat = 0.0;
        double g_value = 0.0;
        double g_derivative = 0.0;
        int expansions = 0;
        int bisection_steps = 0;
        int secular_iterations = 0;
        bool failed = false;
    };

    // Evaluates g(s) = sum_{k>=N} lambda_k^2(L - s z z^H) and g'(s) for one direction, given the
    // eigenvalues L of R (descending) and w = |U^H a|^2.
    class UcfEvaluator
    {
    public:
        UcfEvaluator(const Eigen::VectorXd &lam, std::size_t n_sources, Path path, const SecularOptions &opts, bool warm)
            : lam_(lam), n_(n_sources), path_(path),
              solver_(std::span<const double>(lam.data(), static_cast<std::size_t>(lam.size())), opts),
              roots_(n_sources - 1), w_(static_cast<std::size_t>(lam.size()))
        {
            solver_.set_warm_start(warm);
            tr2_ = lam.squaredNorm();
        }

        void set_direction(const Eigen::VectorXd &w, double a2)
        {
            for (Eigen::Index j = 0; j < w.size(); ++j)
                w_[static_cast<std::size_t>(j)] = w(j);
            a2_ = a2;
            aRa_ = lam_.dot(w);
            if (path_ == Path::Naive)
                z_ = w.cwiseSqrt().cast<cplx>();
        }

        struct Eval
        {
            double g;
            double dg;
        };

        // Throws PoleEvaluation when a principal root is numerically on a pole
        Eval evaluate(double s)
        {
            const double quad = tr2_ - 2.0 * s * aRa_ + s * s * a2_ * a2_;
            const double dquad = -2.0 * aRa_ + 2.0 * s * a2_ * a2_;
            const std::size_t L = n_ - 1;
            if (L == 0)
                return {quad, dquad};
            if (s == 0.0)
            {
                double principal = 0.0, dprincipal = 0.0;
                for (std::size_t k = 0; k < L; ++k)
                {
                    const double l = lam_(static_cast<Eigen::Index>(k));
                    principal += l * l;
                    dprincipal += -2.0 * l * w_[k];
                }
                return {quad - principal, dquad - dprincipal};
            }
            if (path_ == Path::Naive)
                return evaluate_dense(s, quad, dquad);

            solver_.solve(s, w_, L, Which::Largest, roots_);
            double principal = 0.0, dprincipal = 0.0;
            const auto dr = solver_.reduced_d();
            const auto wr = solver_.reduced_w();
            for (std::size_t k = 0; k < L; ++k)
            {
                const double lb = roots_[k];
                principal += lb * lb;
                iterations_ += solver_.last_iterations()[k];
                if (solver_.last_origin()[k] == RootOrigin::Deflated)
                    continue; // unchanged by the update, zero derivative
                double s1 = 0.0, s2 = 0.0;
                for (std::size_t j = 0; j < dr.size(); ++j)
                {
                    const double delta = dr[j] - lb;
                    if (delta == 0.0)
                        throw PoleEvaluation("ucf derivative: root on a pole");
                    s1 += wr[j] / delta;
                    s2 += wr[j] / (delta * delta);
                }
                // d lambda_k / ds = -1 / (s^2 S2). At the root S1 = 1 / s; writing 1 / s^2 as S1^2
                // cancels the error of a root that sits closer to its pole than the solver resolves.
                dprincipal += -2.0 * lb * (s1 * s1) / s2;
            }
            return {quad - principal, dquad - dprincipal};
        }

        int take_iterations()
        {
            const int it = iterations_;
            iterations_ = 0;
            return it;
        }

    private:
        // Dense EVD; derivative from eigenvectors, d lambda_k / ds = -|u_k^H z|^2
        Eval evaluate_dense(double s, double quad, double dquad)
        {
            Eigen::MatrixXcd A = -s * z_ * z_.adjoint();
            A.diagonal() += lam_.cast<cplx>();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> evd(A);
            const auto M = lam_.size();
            double g = 0.0, dg = 0.0;
            for (Eigen::Index k = 0; k < M - static_cast<Eigen::Index>(n_) + 1; ++k) // ascending: smallest first
            {
                const double l = evd.eigenvalues()(k);
                const double proj = std::norm(evd.eigenvectors().col(k).dot(z_));
                g += l * l;
                dg += -2.0 * l * proj;
            }
            (void)quad;
            (void)dquad;
            return {g, dg};
        }

        Eigen::VectorXd lam_;
        std::size_t n_;
        Path path_;
        RankOneEigensolver solver_;
        std::vector<double> roots_;
        std::vector<double> w_;
        Eigen::VectorXcd z_;
        double tr2_ = 0.0, a2_ = 0.0, aRa_ = 0.0;
        int iterations_ = 0;
    };

    namespace detail
    {
        // Evaluate with small multiplicative perturbations if the point sits on a pole
        inline std::optional<UcfEvaluator::Eval> ucf_eval_retry(UcfEvaluator &ev, double s)
        {
            for (int attempt = 0; attempt < 4; ++attempt)
            {
                try
                {
                    return ev.evaluate(s);
                }
                catch (const PoleEvaluation &)
                {
                    s *= 1.0 + 1e-9 * std::ldexp(1.0, 4 * attempt);
                }
            }
            return std::nullopt;
        }

        // Bracket g' sign change by doubling/halving, then bisect
        inline UcfState ucf_minimize(UcfEvaluator &ev, const SpectrumOptions &opt)
        {
            UcfState st;
            st.sigma_left = st.sigma_right = opt.ucf_init_left;
            auto fail = [&]()
            {
                st.failed = true;
                st.g_value = std::numeric_limits<double>::infinity();
                st.secular_iterations = ev.take_iterations();
                return st;
            };

            auto e = ucf_eval_retry(ev, st.sigma_left);
            if (!e)
                return fail();
            if (e->dg < 0.0)
            {
                for (;;)
                {
                    if (st.expansions >= opt.ucf_max_expansions)
                        return fail();
                    st.sigma_right *= 2.0;
                    ++st.expansions;
                    auto er = ucf_eval_retry(ev, st.sigma_right);
                    if (!er)
                        return fail();
                    if (er->dg > 0.0)
                        break;
                    st.sigma_left = st.sigma_right; // still descending here
                }
            }
            else
            {
                for (;;)
                {
                    st.sigma_left *= 0.5;
                    ++st.expansions;
                    if (st.sigma_left < 1e-300)
                    {
                        // g' >= 0 down to the floor: minimizer at the boundary s = 0
                        st.sigma_left = 0.0;
                        st.sigma_hat = 0.0;
                        auto e0 = ev.evaluate(0.0);
                        st.g_value = e0.g;
                        st.g_derivative = e0.dg;
                        st.secular_iterations = ev.take_iterations();
                        return st;
                    }
                    auto el = ucf_eval_retry(ev, st.sigma_left);
                    if (!el)
                        return fail();
                    if (el->dg < 0.0)
                        break;
                    st.sigma_right = st.sigma_left;
                }
            }

            double lo = st.sigma_left, hi = st.sigma_right;
            while (hi - lo > opt.ucf_tolerance * hi)
            {
                const double mid = 0.5 * (lo + hi);
                auto em = ucf_eval_retry(ev, mid);
                if (!em)
                    return fail();
                ++st.bisection_steps;
                if (em->dg < 0.0)
                    lo = mid;
                else
                    hi = mid;
            }
            st.sigma_left = lo;
            st.sigma_right = hi;
            st.sigma_hat = 0.5 * (lo + hi);
            auto ef = ucf_eval_retry(ev, st.sigma_hat);
            if (!ef)
                return fail();
            st.g_value = ef->g;
            st.g_derivative = ef->dg;
            st.secular_iterations = ev.take_iterations();
            return st;
        }
    }

    // g(s) = sum_{k>=N} lambda_k^2(R - s a a^H), evaluated through the rank-one solver
    inline double ucf_objective(const SampleCovariance &r, const Eigen::VectorXcd &a, double sigma2)
    {
        UcfEvaluator ev(r.eig_values(), r.n_sources(), Path::Fast, {}, false);
        ev.set_direction((r.eig_vectors().adjoint() * a).cwiseAbs2(), a.squaredNorm());
        return ev.evaluate(sigma2).g;
    }

    // g'(s) = -2 a^H R a + 2 s |a|^4 + sum_{k<N} 2 lbar_k / (s^2 sum_j |z_j|^2 / (lambda_j - lbar_k)^2)
    inline double ucf_derivative(const SampleCovariance &r, const Eigen::VectorXcd &a, double sigma2)
    {
        if (!(sigma2 > 0.0))
            throw InvalidArgument("ucf_derivative: sigma^2 must be positive");
        UcfEvaluator ev(r.eig_values(), r.n_sources(), Path::Fast, {}, false);
        ev.set_direction((r.eig_vectors().adjoint() * a).cwiseAbs2(), a.squaredNorm());
        return ev.evaluate(sigma2).dg;
    }

    inline UcfState ucf_minimize(const SampleCovariance &r, const Eigen::VectorXcd &a, const SpectrumOptions &opt = {})
    {
        UcfEvaluator ev(r.eig_values(), r.n_sources(), opt.path, opt.secular, opt.warm_start);
        ev.set_direction((r.eig_vectors().adjoint() * a).cwiseAbs2(), a.squaredNorm());
        return detail::ucf_minimize(ev, opt);
    }

    inline SpectrumResult pr_ucf_spectrum(const SampleCovariance &r, const SteeringGrid &grid, const SpectrumOptions &opt = {})
    {
        auto res = detail::make_result(grid, Estimator::PrUcf);
        res.bisection_steps.assign(static_cast<std::size_t>(grid.size()), 0);
        const Eigen::MatrixXd P = detail::projected_power(r.eig_vectors(), grid);
        UcfEvaluator ev(r.eig_values(), r.n_sources(), opt.path, opt.secular, opt.warm_start);
        for (Eigen::Index g = 0; g < grid.size(); ++g)
        {
            ev.set_direction(P.col(g), grid.norm2(g));
            const UcfState st = detail::ucf_minimize(ev, opt);
            const auto gi = static_cast<std::size_t>(g);
            res.values[gi] = st.g_value;
            res.iterations[gi] = st.secular_iterations;
            res.bisection_steps[gi] = st.bisection_steps;
            if (st.failed)
                ++res.failures;
        }
        return res;
    }

    // Dispatch by estimator tag. dml-grid2 is not a spectrum; see peak_search.hpp.
    inline SpectrumResult compute_spectrum(Estimator e, const SampleCovariance &r, const SteeringGrid &grid,
                                           const SpectrumOptions &opt = {})
    {
        switch (e)
        {
        case Estimator::Beamformer: return beamformer_spectrum(r, grid);
        case Estimator::Capon: return capon_spectrum(r, grid);
        case Estimator::Music: return music_spectrum(r, grid);
        case Estimator::PrDml: return pr_dml_spectrum(r, grid, opt);
        case Estimator::PrWsf: return pr_wsf_spectrum(r, grid, opt);
        case Estimator::PrCcf: return pr_ccf_spectrum(r, grid, opt);
        case Estimator::PrUcf: return pr_ucf_spectrum(r, grid, opt);
        case Estimator::DmlGrid2: break;
        }
        throw Unsupported("compute_spectrum: dml-grid2 does not produce a null-spectrum");
    }
}

#endif

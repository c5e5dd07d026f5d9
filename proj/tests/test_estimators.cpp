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

#include "catch2/catch_amalgamated.hpp"
#include "support.hpp"

using namespace prdoa;
using Catch::Approx;

namespace
{
    SampleCovariance noiseless(const ArrayGeometry &g, std::vector<double> doas, std::size_t N)
    {
        const Eigen::MatrixXcd A = steering_matrix(g, doas);
        return SampleCovariance(A * A.adjoint(), N);
    }

    SampleCovariance scenario_covariance(const ArrayGeometry &g, double snr_db, std::size_t T, std::uint64_t seed)
    {
        Scenario s;
        s.doas = {45.0, 50.0};
        s.source_powers = {1.0, 1.0};
        s.noise_power = noise_power_from_snr_db(snr_db);
        s.snapshots = T;
        s.seed = seed;
        return sample_covariance(generate_snapshots(g, s), 2);
    }

    double max_pointwise_rel(const SpectrumResult &a, const SpectrumResult &b)
    {
        return prdoa_test::max_rel_err(a.values, b.values);
    }

    // Sum of the M-N+1 smallest eigenvalues (squared if requested) of a Hermitian matrix
    double tail_sum(const Eigen::MatrixXcd &A, std::size_t N, bool squared)
    {
        const Eigen::VectorXd ev = dense_eigenvalues(A);
        double acc = 0.0;
        for (Eigen::Index k = static_cast<Eigen::Index>(N) - 1; k < ev.size(); ++k)
            acc += squared ? ev(k) * ev(k) : ev(k);
        return acc;
    }
}

TEST_CASE("Estimators - Names and grids")
{
    for (auto e : {Estimator::Beamformer, Estimator::Capon, Estimator::Music, Estimator::PrDml, Estimator::PrWsf,
                   Estimator::PrCcf, Estimator::PrUcf, Estimator::DmlGrid2})
        CHECK(parse_estimator(estimator_name(e)) == e);
    CHECK(estimator_name(Estimator::PrUcf) == "pr-ucf");
    CHECK_THROWS_AS(parse_estimator("root-music"), InvalidArgument);

    auto g = uniform_grid(0.0, 90.0, 1800);
    CHECK(g.size() == 1800);
    CHECK(g[0] == 0.0);
    CHECK(g[900] == 45.0);
    CHECK(g[1000] == 50.0);
    CHECK_THROWS_AS(uniform_grid(1.0, 0.0, 10), InvalidArgument);
    CHECK_THROWS_AS(uniform_grid(0.0, 1.0, 0), InvalidArgument);
}

TEST_CASE("Estimators - Beamformer")
{
    const auto geo = ArrayGeometry::ula(8);
    const SteeringGrid grid(geo, uniform_grid(-60.0, 60.0, 240));

    auto flat = beamformer_spectrum(SampleCovariance(Eigen::MatrixXcd::Identity(8, 8), 1), grid);
    for (double v : flat.values)
        CHECK(v == Approx(7.0).epsilon(1e-12));

    auto single = beamformer_spectrum(noiseless(geo, {20.0}, 1), grid);
    const auto it = std::min_element(single.values.begin(), single.values.end());
    CHECK(grid.angles[static_cast<std::size_t>(it - single.values.begin())] == Approx(20.0));
    CHECK(std::abs(*it) < 1e-12);

    std::mt19937_64 rng(101);
    for (int trial = 0; trial < 10; ++trial)
    {
        auto r = prdoa_test::random_sample_covariance(8, 2, rng);
        auto bf = beamformer_spectrum(r, grid);
        for (Eigen::Index g = 0; g < grid.size(); g += 10)
        {
            const Eigen::MatrixXcd P = detail::orth_projector(grid.steering.col(g));
            const double ref = dense_eigenvalues(Eigen::MatrixXcd(P * r.r_hat())).sum();
            CHECK(prdoa_test::rel_err(bf.values[static_cast<std::size_t>(g)], ref) < 1e-10);
        }
    }
}

TEST_CASE("Estimators - Capon")
{
    const auto geo = ArrayGeometry::ula(6);
    const Eigen::VectorXcd a = steering_vector(geo, 30.0);
    CHECK(capon_power(SampleCovariance(Eigen::MatrixXcd::Identity(6, 6), 1), a) == Approx(1.0 / 6.0));
    CHECK(capon_power(SampleCovariance(3.0 * Eigen::MatrixXcd::Identity(6, 6), 1), a) == Approx(0.5));

    std::mt19937_64 rng(103);
    for (int trial = 0; trial < 200; ++trial)
    {
        auto r = prdoa_test::random_sample_covariance(6, 2, rng);
        const Eigen::VectorXcd b = steering_vector(geo, -80.0 + 0.8 * trial);
        const double s = capon_power(r, b);
        const Eigen::VectorXd ev = dense_eigenvalues(Eigen::MatrixXcd(r.r_hat() - s * b * b.adjoint()));
        CHECK(std::abs(ev(ev.size() - 1)) <= 1e-10 * r.r_hat().norm());
    }

    SampleCovariance singular(Eigen::MatrixXcd(a * a.adjoint()), 1);
    CHECK_THROWS_AS(capon_power(singular, a), SingularCovariance);
    CHECK_THROWS_AS(capon_spectrum(singular, SteeringGrid(geo, {0.0, 10.0})), SingularCovariance);

    // Spectrum is the reciprocal power
    auto r = prdoa_test::random_sample_covariance(6, 2, rng);
    const SteeringGrid grid(geo, uniform_grid(-60.0, 60.0, 50));
    auto cs = capon_spectrum(r, grid);
    for (Eigen::Index g = 0; g < grid.size(); ++g)
        CHECK(cs.values[static_cast<std::size_t>(g)] == Approx(1.0 / capon_power(r, grid.steering.col(g))).epsilon(1e-12));
}

TEST_CASE("Estimators - MUSIC")
{
    const auto geo = ArrayGeometry::ula(10);
    const SteeringGrid grid(geo, uniform_grid(0.0, 90.0, 1800));

    auto nl = noiseless(geo, {45.0, 50.0}, 2);
    auto mu = music_spectrum(nl, grid);
    CHECK(std::abs(mu.values[900]) < 1e-12);
    CHECK(std::abs(mu.values[1000]) < 1e-12);
    auto est = find_n_minima(mu, 2);
    CHECK(est.angles[0] == Approx(45.0));
    CHECK(est.angles[1] == Approx(50.0));

    std::mt19937_64 rng(107);
    auto r = prdoa_test::random_sample_covariance(10, 3, rng);
    for (double v : music_spectrum(r, grid).values)
    {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0 + 1e-12);
    }
}

TEST_CASE("Estimators - WSF weighting")
{
    Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(6, 6);
    D.diagonal() << 10.0, 5.0, 1.0, 1.0, 1.0, 1.0;
    auto w = wsf_weighting(SampleCovariance(D, 2));
    CHECK(w.sigma_n_hat == Approx(1.0));
    CHECK(w.w(0) == Approx(81.0 / 10.0));
    CHECK(w.w(1) == Approx(16.0 / 5.0));

    D.diagonal() << 10.0, 2.0, 2.0, 2.0, 2.0, 2.0;
    auto w2 = wsf_weighting(SampleCovariance(D, 2));
    CHECK(w2.sigma_n_hat == Approx(2.0));
    CHECK(w2.w(1) == 0.0);

    auto id = WsfWeighting::identity(3);
    CHECK(id.w == Eigen::VectorXd::Ones(3));
}

TEST_CASE("Estimators - PR-DML")
{
    const auto geo = ArrayGeometry::ula(8);
    const SteeringGrid grid(geo, uniform_grid(-70.0, 70.0, 281));
    std::mt19937_64 rng(109);

    SECTION("One source is the beamformer")
    {
        auto r = prdoa_test::random_sample_covariance(8, 1, rng);
        auto a = pr_dml_spectrum(r, grid), b = beamformer_spectrum(r, grid);
        CHECK(max_pointwise_rel(a, b) < 1e-12);
    }

    SECTION("Perfect fit at the true directions")
    {
        auto r = noiseless(geo, {-10.0, 15.0, 40.0}, 3);
        const SteeringGrid at(geo, {-10.0, 15.0, 40.0});
        for (double v : pr_dml_spectrum(r, at).values)
            CHECK(std::abs(v) < 1e-10 * r.r_hat().norm());
    }

    SECTION("Fast path equals the dense path")
    {
        for (int trial = 0; trial < 20; ++trial)
        {
            const std::size_t N = 1 + static_cast<std::size_t>(trial % 4);
            auto r = prdoa_test::random_sample_covariance(8, N, rng);
            SpectrumOptions naive;
            naive.path = Path::Naive;
            auto fast = pr_dml_spectrum(r, grid), ref = pr_dml_spectrum(r, grid, naive);
            CHECK(max_pointwise_rel(fast, ref) <= 1e-8);
            for (double v : fast.values)
                CHECK(v >= 0.0);
        }
    }
}

TEST_CASE("Estimators - PR-WSF")
{
    const auto geo = ArrayGeometry::ula(9);
    const SteeringGrid grid(geo, uniform_grid(-70.0, 70.0, 281));
    std::mt19937_64 rng(113);

    SECTION("Identity weighting is MUSIC")
    {
        for (int trial = 0; trial < 10; ++trial)
        {
            const std::size_t N = 1 + static_cast<std::size_t>(trial % 4);
            auto r = prdoa_test::random_sample_covariance(9, N, rng);
            auto a = pr_wsf_spectrum(r, WsfWeighting::identity(N), grid);
            auto b = music_spectrum(r, grid);
            CHECK(max_pointwise_rel(a, b) <= 1e-10);
        }
    }

    SECTION("Perfect fit at the true directions")
    {
        auto r = noiseless(geo, {-20.0, 30.0}, 2);
        const SteeringGrid at(geo, {-20.0, 30.0});
        for (double v : pr_wsf_spectrum(r, WsfWeighting::identity(2), at).values)
            CHECK(std::abs(v) < 1e-10);
    }

    SECTION("Fast path equals the dense path")
    {
        for (int trial = 0; trial < 20; ++trial)
        {
            const std::size_t N = 1 + static_cast<std::size_t>(trial % 4);
            auto r = prdoa_test::random_sample_covariance(9, N, rng);
            SpectrumOptions naive;
            naive.path = Path::Naive;
            auto fast = pr_wsf_spectrum(r, grid), ref = pr_wsf_spectrum(r, grid, naive);
            CHECK(max_pointwise_rel(fast, ref) <= 1e-9);
            for (double v : fast.values)
                CHECK(v >= 0.0);
        }
    }

    CHECK_THROWS_AS(pr_wsf_spectrum(prdoa_test::random_sample_covariance(9, 2, rng), WsfWeighting::identity(3), grid),
                    InvalidArgument);
}

TEST_CASE("Estimators - PR-CCF")
{
    const auto geo = ArrayGeometry::ula(8);
    const SteeringGrid grid(geo, uniform_grid(-70.0, 70.0, 281));
    std::mt19937_64 rng(127);

    SECTION("Isotropic covariance")
    {
        for (std::size_t N = 1; N < 8; ++N)
        {
            auto f = pr_ccf_spectrum(SampleCovariance(Eigen::MatrixXcd::Identity(8, 8), N), grid);
            for (double v : f.values)
                CHECK(v == Approx(8.0 - static_cast<double>(N)).epsilon(1e-10));
        }
    }

    SECTION("One source needs no eigenvalues")
    {
        auto r = prdoa_test::random_sample_covariance(8, 1, rng);
        auto f = pr_ccf_spectrum(r, grid);
        const double tr2 = (r.r_hat() * r.r_hat()).trace().real();
        for (Eigen::Index g = 0; g < grid.size(); g += 7)
        {
            const Eigen::VectorXcd a = grid.steering.col(g);
            const double s = capon_power(r, a), aRa = a.dot(r.r_hat() * a).real(), a2 = a.squaredNorm();
            CHECK(prdoa_test::rel_err(f.values[static_cast<std::size_t>(g)], tr2 - 2.0 * s * aRa + s * s * a2 * a2) < 1e-9);
            CHECK(f.iterations[static_cast<std::size_t>(g)] == 0);
        }
    }

    SECTION("Fast path equals the dense path")
    {
        for (int trial = 0; trial < 20; ++trial)
        {
            const std::size_t N = 1 + static_cast<std::size_t>(trial % 4);
            auto r = prdoa_test::random_sample_covariance(8, N, rng);
            SpectrumOptions naive;
            naive.path = Path::Naive;
            auto fast = pr_ccf_spectrum(r, grid), ref = pr_ccf_spectrum(r, grid, naive);
            CHECK_FALSE(fast.loaded);
            CHECK(max_pointwise_rel(fast, ref) <= 1e-8);
            for (double v : fast.values)
                CHECK(v >= 0.0);
        }
    }

    SECTION("Objective decreases up to the Capon power")
    {
        for (int trial = 0; trial < 20; ++trial)
        {
            auto r = prdoa_test::random_sample_covariance(8, 3, rng);
            const Eigen::VectorXcd a = grid.steering.col(trial * 13);
            const double sc = capon_power(r, a);
            double prev = tail_sum(r.r_hat(), 3, true);
            for (int i = 1; i <= 20; ++i)
            {
                const double s = sc * i / 20.0;
                const double cur = tail_sum(Eigen::MatrixXcd(r.r_hat() - s * a * a.adjoint()), 3, true);
                CHECK(cur < prev);
                prev = cur;
            }
        }
    }

    SECTION("Singular covariance is loaded automatically")
    {
        Scenario s;
        s.doas = {10.0, 30.0};
        s.source_powers = {1.0, 1.0};
        s.snapshots = 4;
        auto r = sample_covariance(generate_snapshots(geo, s), 2);
        REQUIRE(r.is_singular());
        auto f = pr_ccf_spectrum(r, grid);
        CHECK(f.loaded);
        auto ref = pr_ccf_spectrum(diagonal_load(r, 1e-4), grid);
        CHECK_FALSE(ref.loaded);
        CHECK(max_pointwise_rel(f, ref) == 0.0);
        for (double v : f.values)
            CHECK(std::isfinite(v));
    }
}

TEST_CASE("Estimators - PR-UCF")
{
    const auto geo = ArrayGeometry::ula(8);
    const SteeringGrid grid(geo, uniform_grid(-70.0, 70.0, 141));
    std::mt19937_64 rng(131);

    SECTION("Derivative against central differences")
    {
        for (int trial = 0; trial < 100; ++trial)
        {
            const std::size_t N = 2 + static_cast<std::size_t>(trial % 3);
            auto r = prdoa_test::random_sample_covariance(8, N, rng);
            const Eigen::VectorXcd a = grid.steering.col(trial);
            std::uniform_real_distribution<double> us(0.01, 2.0);
            const double s = us(rng) * r.eig_values()(0) / 8.0;
            const double h = 1e-5 * s;
            const double fd = (ucf_objective(r, a, s + h) - ucf_objective(r, a, s - h)) / (2.0 * h);
            const double an = ucf_derivative(r, a, s);
            CHECK(std::abs(an - fd) <= 1e-4 * std::max(std::abs(an), 1e-3 * r.eig_values().squaredNorm()));
        }
    }

    SECTION("Objective matches dense eigenvalues")
    {
        auto r = prdoa_test::random_sample_covariance(8, 3, rng);
        const Eigen::VectorXcd a = grid.steering.col(40);
        for (double s : {0.0, 1e-6, 0.1, 1.0, 10.0})
        {
            const double ref = tail_sum(Eigen::MatrixXcd(r.r_hat() - s * a * a.adjoint()), 3, true);
            CHECK(prdoa_test::rel_err(ucf_objective(r, a, s), ref) < 1e-9);
        }
    }

    SECTION("Derivative signs at the ends")
    {
        for (int trial = 0; trial < 20; ++trial)
        {
            auto r = prdoa_test::random_sample_covariance(8, 2, rng);
            const Eigen::VectorXcd a = grid.steering.col(trial * 5);
            CHECK(ucf_derivative(r, a, 1e-12) < 0.0);
            CHECK(ucf_derivative(r, a, 1e3 * r.r_hat().norm()) > 0.0);
        }
        CHECK_THROWS_AS(ucf_derivative(prdoa_test::random_sample_covariance(8, 2, rng), grid.steering.col(0), 0.0),
                        InvalidArgument);
    }

    SECTION("Isotropic covariance")
    {
        for (std::size_t N = 1; N < 5; ++N)
        {
            SampleCovariance r(Eigen::MatrixXcd::Identity(8, 8), N);
            auto st = ucf_minimize(r, grid.steering.col(3));
            CHECK(st.sigma_hat == Approx(1.0 / 8.0).epsilon(1e-7));
            CHECK(st.g_value == Approx(8.0 - static_cast<double>(N)).epsilon(1e-10));
            auto f = pr_ucf_spectrum(r, grid);
            for (double v : f.values)
                CHECK(v == Approx(8.0 - static_cast<double>(N)).epsilon(1e-10));
        }
    }

    SECTION("Minimizer is stationary and bracketed")
    {
        for (int trial = 0; trial < 30; ++trial)
        {
            auto r = prdoa_test::random_sample_covariance(8, 2 + static_cast<std::size_t>(trial % 3), rng);
            const Eigen::VectorXcd a = grid.steering.col(trial * 4);
            auto st = ucf_minimize(r, a);
            REQUIRE_FALSE(st.failed);
            CHECK(st.sigma_left < st.sigma_right);
            CHECK((st.sigma_right - st.sigma_left) <= 1e-8 * st.sigma_right);
            CHECK(ucf_derivative(r, a, st.sigma_left) < 0.0);
            CHECK(ucf_derivative(r, a, st.sigma_right) >= 0.0);
            // |g'| bounded by the curvature over the final bracket
            const double curv = std::abs(ucf_derivative(r, a, st.sigma_right) - ucf_derivative(r, a, st.sigma_left));
            CHECK(std::abs(st.g_derivative) <= curv + 1e-9 * r.eig_values().squaredNorm());
            // and g is not larger than at neighbouring points
            CHECK(st.g_value <= ucf_objective(r, a, st.sigma_hat * 1.01) + 1e-12);
            CHECK(st.g_value <= ucf_objective(r, a, st.sigma_hat * 0.99) + 1e-12);
        }
    }

    SECTION("Objective is continuous in sigma")
    {
        auto r = prdoa_test::random_sample_covariance(8, 3, rng);
        const Eigen::VectorXcd a = grid.steering.col(70);
        const double top = 2.0 * r.eig_values()(0);
        double lip = 0.0;
        for (int i = 1; i <= 2000; ++i)
            lip = std::max(lip, std::abs(ucf_derivative(r, a, top * i / 2000.0)));
        double prev = ucf_objective(r, a, 0.0);
        for (int i = 1; i <= 2000; ++i)
        {
            const double cur = ucf_objective(r, a, top * i / 2000.0);
            CHECK(std::abs(cur - prev) <= 1.01 * lip * top / 2000.0 + 1e-12);
            prev = cur;
        }
    }

    SECTION("Fast and dense evaluation agree")
    {
        for (int trial = 0; trial < 5; ++trial)
        {
            auto r = prdoa_test::random_sample_covariance(8, 2 + static_cast<std::size_t>(trial % 2), rng);
            SpectrumOptions naive;
            naive.path = Path::Naive;
            auto fast = pr_ucf_spectrum(r, grid), ref = pr_ucf_spectrum(r, grid, naive);
            CHECK(fast.failures == 0);
            CHECK(max_pointwise_rel(fast, ref) <= 1e-7);
            for (double v : fast.values)
                CHECK(v >= 0.0);
        }
    }

    SECTION("Close to PR-CCF in the standard scenario")
    {
        const auto g10 = ArrayGeometry::ula(10);
        const SteeringGrid fine(g10, uniform_grid(0.0, 90.0, 1800));
        auto r = scenario_covariance(g10, 10.0, 40, 99);
        auto u = pr_ucf_spectrum(r, fine), c = pr_ccf_spectrum(r, fine);
        Eigen::Map<const Eigen::ArrayXd> x(u.values.data(), 1800), y(c.values.data(), 1800);
        const double cov = ((x - x.mean()) * (y - y.mean())).mean();
        const double corr = cov / std::sqrt((x - x.mean()).square().mean() * (y - y.mean()).square().mean());
        CHECK(corr > 0.9);
        // UCF optimizes over the scale that CCF fixes, so it is never larger
        for (std::size_t i = 0; i < 1800; ++i)
            CHECK(u.values[i] <= c.values[i] * (1.0 + 1e-12));
        auto eu = find_n_minima(u, 2), ec = find_n_minima(c, 2);
        CHECK(std::abs(eu.angles[0] - ec.angles[0]) <= 0.5);
        CHECK(std::abs(eu.angles[1] - ec.angles[1]) <= 0.5);
    }
}

TEST_CASE("Estimators - Partial-relaxation identity")
{
    // max_B tr(P_{P_a^perp B} R) is attained by the N-1 principal eigenvectors of P_a^perp R P_a^perp
    const auto geo = ArrayGeometry::ula(7);
    std::mt19937_64 rng(137);
    for (int trial = 0; trial < 10; ++trial)
    {
        const std::size_t N = 2 + static_cast<std::size_t>(trial % 3);
        auto r = prdoa_test::random_sample_covariance(7, N, rng);
        const Eigen::VectorXcd a = steering_vector(geo, -50.0 + 10.0 * trial);
        const Eigen::MatrixXcd P = detail::orth_projector(a);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> evd(P * r.r_hat() * P);
        const auto L = static_cast<Eigen::Index>(N - 1);
        const Eigen::MatrixXcd B = evd.eigenvectors().rightCols(L);
        auto fit = [&](const Eigen::MatrixXcd &b)
        {
            Eigen::HouseholderQR<Eigen::MatrixXcd> qr(P * b);
            const Eigen::MatrixXcd Q = qr.householderQ() * Eigen::MatrixXcd::Identity(7, L);
            return (Q.adjoint() * r.r_hat() * Q).trace().real();
        };
        const double best = fit(B);
        CHECK(std::abs(best - evd.eigenvalues().tail(L).sum()) <= 1e-9 * r.r_hat().norm());
        for (int i = 0; i < 50; ++i)
        {
            Eigen::MatrixXcd Bi(7, L);
            for (Eigen::Index c = 0; c < L; ++c)
                Bi.col(c) = prdoa_test::random_cvec(7, rng);
            CHECK(fit(Bi) <= best + 1e-9);
        }
    }
}

TEST_CASE("Estimators - Dispatch")
{
    const auto geo = ArrayGeometry::ula(6);
    const SteeringGrid grid(geo, uniform_grid(0.0, 90.0, 30));
    std::mt19937_64 rng(139);
    auto r = prdoa_test::random_sample_covariance(6, 2, rng);
    for (auto e : {Estimator::Beamformer, Estimator::Capon, Estimator::Music, Estimator::PrDml, Estimator::PrWsf,
                   Estimator::PrCcf, Estimator::PrUcf})
    {
        auto s = compute_spectrum(e, r, grid);
        CHECK(s.estimator == e);
        CHECK(s.values.size() == 30);
        CHECK(s.grid == grid.angles);
        for (double v : s.values)
        {
            CHECK(std::isfinite(v));
            CHECK(v >= 0.0);
        }
    }
    CHECK_THROWS_AS(compute_spectrum(Estimator::DmlGrid2, r, grid), Unsupported);
    CHECK(has_naive_path(Estimator::PrUcf));
    CHECK_FALSE(has_naive_path(Estimator::Music));
}

#include "doctest.h"

#include <cmath>

#include "ddsusy/oracle.hpp"
#include "ddsusy/pipeline.hpp"

using namespace ddsusy;

namespace {
constexpr double kA = 2.2;
}

TEST_CASE("solve_original_pair orders and labels the two states") {
  const OriginalPair low = solve_original_pair(kA, 0.3);
  CHECK(low.s0.kappa.real() > low.s1.kappa.real());
  CHECK(std::abs(low.s0.energy().imag()) < 1e-8);
  CHECK(low.s0.energy().real() < low.s1.energy().real());  // ground below

  const OriginalPair high = solve_original_pair(kA, 0.5);
  CHECK(high.s0.energy().imag() > 0.0);
  CHECK(std::abs(high.s0.kappa - std::conj(high.s1.kappa)) < 1e-8);
}

TEST_CASE("sweep_spectrum: spectra, pairing and the gamma_crit flag") {
  std::vector<double> grid;
  for (double g = 0.0; g < 0.6001; g += 0.05) grid.push_back(g);
  const SpectrumTable table = sweep_spectrum(kA, grid, 0);
  REQUIRE(table.rows.size() == grid.size());

  int flagged = 0;
  bool seen_broken = false;
  for (const SpectrumRow& row : table.rows) {
    const bool broken = std::abs(row.E0_1.imag()) > 1e-8;
    if (row.gamma_crit_flag) {
      ++flagged;
      CHECK(row.gamma == doctest::Approx(0.45));  // first grid point past 0.4005
    }
    if (!broken) {
      CHECK_FALSE(seen_broken);
      CHECK(std::abs(row.E1_1.imag()) < 1e-8);
    } else {
      seen_broken = true;
      CHECK(std::abs(row.E0_1 - std::conj(row.E1_1)) < 1e-8);
      // removed ground state: the partner energy is purely imaginary
      CHECK(std::abs(row.E0_2.real()) < 1e-8);
      CHECK(std::abs(row.E0_2 - Complex(0, 2.0 * row.E1_1.imag())) < 1e-6);
    }
    // isospectrality in the linear case, row by row
    CHECK(std::abs(row.E0_2 - (row.E1_1 - row.E0_1)) < 1e-6);
  }
  CHECK(flagged == 1);

  // the gamma = 0 row carries the frozen ground-removal energy
  const SpectrumRow& first = table.rows.front();
  CHECK(std::abs(first.E0_2 - Complex(0.384259351578, 0.0)) < 1e-6);
  CHECK(first.E0_2.real() > 0.0);
  CHECK(first.E0_2.real() < std::abs(first.E0_1.real()));
}

TEST_CASE("partner energy approaches zero toward the exceptional point") {
  const SpectrumTable table = sweep_spectrum(kA, {0.3, 0.38, 0.4}, 0);
  const double e_far = std::abs(table.rows[0].E0_2);
  const double e_mid = std::abs(table.rows[1].E0_2);
  const double e_near = std::abs(table.rows[2].E0_2);
  CHECK(e_mid < e_far);
  CHECK(e_near < e_mid);
  CHECK(e_near < 0.03);
}

TEST_CASE("remove_state: excited removal at gamma = 0.3 is PT symmetric") {
  const RemovalReport report = remove_state(0.3, kA, 1, std::nullopt, 0.0);
  CHECK(std::abs(report.partner_solution.energy() - report.ideal_energy) < 1e-6);
  CHECK(report.ideal_energy.real() < 0.0);  // remaining state sits below
  double asym = 0.0;
  for (double x = 0.025; x < 4.0; x += 0.05)
    asym = std::max(asym, std::abs(evaluate_smooth(report.partner.field, -x) -
                                   std::conj(evaluate_smooth(report.partner.field, x))));
  CHECK(asym < 1e-9);
  CHECK_FALSE(report.pole_warning);
  CHECK(report.factorization_residual < 1e-8);
}

TEST_CASE("remove_state: Hermitian excited removal fails on the node") {
  CHECK_THROWS_AS(remove_state(0.0, kA, 1, std::nullopt, 0.0), NodalStateError);
}

TEST_CASE("remove_state: gamma = 0.05 excited removal digs toward -540") {
  const RemovalReport report = remove_state(0.05, kA, 1, std::nullopt, 0.0);
  CHECK(report.pole_warning);  // the paper's divergence announces itself
  const Complex v0 = evaluate_smooth(report.partner.field, 0.0);
  CHECK(v0.real() == doctest::Approx(-540.0).epsilon(0.10));
  CHECK(std::abs(report.partner_solution.energy() - report.ideal_energy) < 1e-6);
}

TEST_CASE("remove_state with a finite xi keeps the spectrum, breaks PT") {
  const RemovalReport standard = remove_state(0.3, kA, 0, std::nullopt, 0.0);
  const RemovalReport skewed =
      remove_state(0.3, kA, 0, Complex(-1.0, 1.0), 0.0);
  CHECK(std::abs(skewed.partner_solution.energy() -
                 standard.partner_solution.energy()) < 1e-6);
  double asym = 0.0;
  for (double x = 0.025; x < 4.0; x += 0.05)
    asym = std::max(asym, std::abs(evaluate_smooth(skewed.partner.field, -x) -
                                   std::conj(evaluate_smooth(skewed.partner.field, x))));
  CHECK(asym > 1e-2);
}

TEST_CASE("nonlinear_comparison covers the linear limit and the g ordering") {
  const std::vector<NonlinearRow> rows =
      nonlinear_comparison({0.0, 0.01}, kA, {0.0, 0.1});
  REQUIRE(rows.size() == 4);
  for (const NonlinearRow& row : rows) {
    REQUIRE(row.converged);
    if (row.g == 0.0)
      CHECK(row.deviation < 1e-6);
    else {
      CHECK(row.E0_2.real() >= row.E_id.real() - 1e-9);
      CHECK(row.deviation < 0.01);
    }
  }
}

TEST_CASE("the frozen-nonlinearity family stays isospectral at g > 0") {
  // every Riccati trajectory factorises the same frozen operator
  // V1 = kappa^2 + g |phi_0|^2, so varying the integration constant changes
  // the partner potential drastically without moving its eigenvalue
  const RemovalReport standard = remove_state(0.1, kA, 0, std::nullopt, 0.01);
  const RemovalReport skewed =
      remove_state(0.1, kA, 0, Complex(-1.0, 0.5), 0.01);
  const double shift = std::abs(skewed.partner_solution.energy() -
                                standard.partner_solution.energy());
  CHECK(shift < 1e-6);
  double asym = 0.0;
  for (double x = 0.025; x < 4.0; x += 0.05)
    asym = std::max(asym, std::abs(evaluate_smooth(skewed.partner.field, -x) -
                                   std::conj(evaluate_smooth(skewed.partner.field, x))));
  CHECK(asym > 1e-2);  // the potentials themselves are very different
}

TEST_CASE("nonlinear removal report at g = 0.01") {
  const RemovalReport report = remove_state(0.1, kA, 0, std::nullopt, 0.01);
  CHECK(report.partner_solution.norm == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(report.factorization_residual < 1e-6);
  CHECK(report.w.junction_mismatch < 1e-6);
  // the remaining state's energy is nearly preserved
  CHECK(std::abs(report.partner_solution.energy() - report.ideal_energy) < 1e-3);
}

TEST_CASE("ep_study: both estimates and the survivor state") {
  const EpStudyReport report = ep_study(kA);
  CHECK(std::abs(report.gamma_crit_oracle - 0.4005) < 1e-3);
  CHECK(report.estimate_gap < 1e-3);
  CHECK(std::abs(report.survivor_energy) < 1e-3);
  CHECK(report.survivor_pt_asymmetry < 1e-6);
  CHECK(report.survivor_norm == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("make_gamma_grid refines near gamma_crit and handles empty ranges") {
  CHECK(make_gamma_grid(0.5, 0.2, 0.01, std::nullopt).empty());
  const std::vector<double> plain = make_gamma_grid(0.0, 0.1, 0.02, std::nullopt);
  REQUIRE(plain.size() == 6);
  CHECK(plain.front() == 0.0);
  CHECK(plain.back() == doctest::Approx(0.1));

  const std::vector<double> refined =
      make_gamma_grid(0.0, 0.6, 0.005, 0.4005);
  std::size_t fine_points = 0;
  for (std::size_t i = 1; i < refined.size(); ++i) {
    CHECK(refined[i] > refined[i - 1]);
    if (refined[i] > 0.3905 && refined[i] < 0.4105 &&
        refined[i] - refined[i - 1] < 6e-4)
      ++fine_points;
  }
  CHECK(fine_points > 20);
}

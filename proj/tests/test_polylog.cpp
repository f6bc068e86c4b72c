#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "ggr/polylog.hpp"

using ggr::gamma_half;
using ggr::neg_polylog;
using ggr::neg_polylog_asymptotic;

TEST_CASE("half-integer gamma recursion") {
  const double sp = std::sqrt(std::numbers::pi);
  CHECK(gamma_half(1) == Catch::Approx(sp).epsilon(1e-15));          // Gamma(1/2)
  CHECK(gamma_half(2) == Catch::Approx(1.0).epsilon(1e-15));         // Gamma(1)
  CHECK(gamma_half(3) == Catch::Approx(0.5 * sp).epsilon(1e-15));    // Gamma(3/2)
  CHECK(gamma_half(5) == Catch::Approx(0.75 * sp).epsilon(1e-15));   // Gamma(5/2)
  CHECK(gamma_half(7) == Catch::Approx(1.875 * sp).epsilon(1e-15));  // Gamma(7/2)
  CHECK(gamma_half(8) == Catch::Approx(6.0).epsilon(1e-15));         // Gamma(4)
}

namespace {
struct RefValue {
  int twice_s;
  double x;
  double value; // -Li_s(-e^x), 20 significant digits from an arbitrary-precision evaluation
};

// Reference values span the series branch (x <= 0), the accelerated-series
// window (x in (-0.7, 0]), and the quadrature branch (x > 0) up to the deeply
// degenerate regime x = 200.
constexpr RefValue kRef[] = {
    {1, -20.0, 2.0611536194345177302e-9},
    {1, -2.0, 0.12366562180120994266},
    {1, -0.5, 0.43123144192639708687},
    {1, 0.0, 0.60489864342163037025},
    {1, 0.5, 0.80774596957990475882},
    {1, 2.0, 1.4642945890876291203},
    {1, 10.0, 3.5527792395366171601},
    {1, 100.0, 11.283327442927680603},
    {1, 200.0, 15.957527139903197952},
    {2, -20.0, 2.0611536203143807032e-9},
    {2, -2.0, 0.12692801104297249644},
    {2, -0.5, 0.47407698418010668087},
    {2, 0.0, 0.69314718055994530942},
    {2, 0.5, 0.97407698418010668087},
    {2, 2.0, 2.1269280110429724964},
    {2, 10.0, 10.000045398899216865},
    {2, 100.0, 100.0},
    {2, 200.0, 200.0},
    {3, -20.0, 2.0611536209365377783e-9},
    {3, -2.0, 0.12929851332007559106},
    {3, -0.5, 0.50753710355463783614},
    {3, 0.0, 0.76514702462540794537},
    {3, 0.5, 1.1173314873128224008},
    {3, 2.0, 2.8237212774015841337},
    {3, 10.0, 24.084656964637653615},
    {3, 100.0, 752.34559155219611884},
    {3, 200.0, 2127.7577869328637439},
    {4, -20.0, 2.0611536213764692651e-9},
    {4, -2.0, 0.13101248471442377127},
    {4, -0.5, 0.53321727999488125117},
    {4, 0.0, 0.82246703342411321824},
    {4, 0.5, 1.2367167868533451853},
    {4, 2.0, 3.5139215821338026652},
    {4, 10.0, 51.64488866743374196},
    {4, 100.0, 5001.6449340668482264},
    {4, 200.0, 20001.644934066848226},
    {5, -20.0, 2.0611536216875478028e-9},
    {5, -2.0, 0.13224678225177236685},
    {5, -0.5, 0.55264952594735408541},
    {5, 0.0, 0.86719988901218413819},
    {5, 0.5, 1.3335889194417633308},
    {5, 2.0, 4.1654144598683216585},
    {5, 10.0, 101.0051008433260002},
    {5, 100.0, 30108.671681354869361},
    {5, 200.0, 170241.62213226332409},
};
} // namespace

TEST_CASE("neg_polylog matches arbitrary-precision reference to 1e-12") {
  for (const auto& r : kRef) {
    CAPTURE(r.twice_s, r.x);
    const double got = neg_polylog(r.twice_s, r.x);
    CHECK(got == Catch::Approx(r.value).epsilon(1e-12));
  }
}

TEST_CASE("neg_polylog branch continuity across x = 0 and the series split") {
  // The alternating-series and quadrature branches meet at x = 0; the direct
  // and accelerated series meet at z = 1/2. Probe both seams. The function
  // itself varies by ~|dΛ/dx|·2δ over the probe gap, so the tolerance must
  // sit above that floor (δ = 1e-10 ⇒ variation ~2e-10 relative).
  for (int twice_s : {1, 2, 3, 4, 5}) {
    CAPTURE(twice_s);
    const double left = neg_polylog(twice_s, -1e-9);
    const double right = neg_polylog(twice_s, 1e-9);
    CHECK(left == Catch::Approx(right).epsilon(1e-8));
    const double a = neg_polylog(twice_s, std::log(0.5) - 1e-10);
    const double b = neg_polylog(twice_s, std::log(0.5) + 1e-10);
    CHECK(a == Catch::Approx(b).epsilon(2e-9));
  }
}

TEST_CASE("neg_polylog special values and monotonicity") {
  // -Li_1(-z) = log(1+z) in closed form.
  for (double x : {-3.0, -1.0, 0.0, 1.0, 4.0, 30.0})
    CHECK(neg_polylog(2, x) == Catch::Approx(std::log1p(std::exp(x))).epsilon(1e-13));
  // Strictly increasing in x at every order.
  for (int twice_s : {1, 3, 5}) {
    double prev = 0.0;
    for (double x = -10.0; x <= 50.0; x += 2.5) {
      const double v = neg_polylog(twice_s, x);
      CHECK(v > prev);
      prev = v;
    }
  }
}

TEST_CASE("neg_polylog large-x expansion agreement") {
  // At x = 100 the residual after two correction terms is O(x^(s-6)),
  // far below the 1e-8 relative tolerance used here.
  for (int twice_s : {1, 2, 3, 4, 5}) {
    CAPTURE(twice_s);
    const double got = neg_polylog(twice_s, 100.0);
    const double asym = neg_polylog_asymptotic(twice_s, 100.0);
    CHECK(got == Catch::Approx(asym).epsilon(1e-8));
  }
}

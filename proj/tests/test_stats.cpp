#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <vector>

#include "levygrow/rng.hpp"
#include "levygrow/stats.hpp"

using namespace levygrow;

namespace {

std::vector<double> exp_sample(Rng& rng, double rate, int n) {
  std::vector<double> xs(n);
  for (auto& x : xs) x = rng.exponential(rate);
  return xs;
}

std::vector<double> poisson_sample(Rng& rng, double mean, int n) {
  std::vector<double> xs(n);
  for (auto& x : xs) x = static_cast<double>(rng.poisson(mean));
  return xs;
}

// geometric on {0, 1, ...} with success probability p
double geometric(Rng& rng, double p) {
  return std::floor(std::log(rng.uniform()) / std::log1p(-p));
}

}  // namespace

TEST_CASE("two-sample KS test") {
  SECTION("identical samples give p = 1") {
    Rng rng = Rng::stream(301, 0);
    auto xs = exp_sample(rng, 1.0, 100);
    auto r = ks_two_sample(xs, xs, "identical");
    CHECK(r.statistic == 0.0);
    CHECK(*r.p_value == 1.0);
    CHECK(r.verdict == Verdict::kPass);
  }
  SECTION("small samples are refused") {
    std::vector<double> xs(10, 1.0);
    CHECK_THROWS_AS(ks_two_sample(xs, xs, "tiny"), NumericError);
  }
  SECTION("null acceptance and power at n = 1e4") {
    Rng rng = Rng::stream(301, 1);
    auto xs = exp_sample(rng, 1.0, 10000);
    auto ys = exp_sample(rng, 1.0, 10000);
    auto zs = exp_sample(rng, 2.0, 10000);
    CHECK(ks_two_sample(xs, ys, "null").verdict == Verdict::kPass);
    CHECK(ks_two_sample(xs, zs, "shifted").verdict == Verdict::kFail);
  }
}

TEST_CASE("chi-square goodness of fit") {
  SECTION("exact proportions give p near 1") {
    std::vector<double> counts = {500.0, 300.0, 200.0};
    std::vector<double> probs = {0.5, 0.3, 0.2};
    auto r = chi_square_gof(counts, probs, "exact");
    CHECK(r.statistic == Catch::Approx(0.0).margin(1e-12));
    CHECK(*r.p_value > 0.999);
  }
  SECTION("fair die null passes, biased die fails") {
    Rng rng = Rng::stream(303, 0);
    std::vector<double> fair(6, 0.0), biased(6, 0.0);
    std::vector<double> probs(6, 1.0 / 6.0);
    for (int i = 0; i < 6000; ++i) {
      fair[rng.next_u64() % 6] += 1.0;
      // a die that favours high faces
      double u = rng.uniform();
      biased[u < 0.5 ? 5 : rng.next_u64() % 6] += 1.0;
    }
    CHECK(chi_square_gof(fair, probs, "fair").verdict == Verdict::kPass);
    CHECK(chi_square_gof(biased, probs, "biased").verdict == Verdict::kFail);
  }
  SECTION("sparse tail bins are pooled") {
    // last bins expect < 5 counts each; pooling keeps the test valid
    Rng rng = Rng::stream(303, 1);
    std::vector<double> probs = {0.6, 0.3, 0.05, 0.03, 0.015, 0.005};
    std::vector<double> counts(6, 0.0);
    for (int i = 0; i < 400; ++i) {
      double u = rng.uniform(), acc = 0.0;
      for (std::size_t k = 0; k < probs.size(); ++k) {
        acc += probs[k];
        if (u < acc || k + 1 == probs.size()) {
          counts[k] += 1.0;
          break;
        }
      }
    }
    CHECK(chi_square_gof(counts, probs, "pooled").verdict == Verdict::kPass);
  }
}

TEST_CASE("poisson dispersion test") {
  SECTION("simulated Poisson passes") {
    Rng rng = Rng::stream(307, 0);
    auto xs = poisson_sample(rng, 3.0, 10000);
    CHECK(poisson_dispersion(xs, 3.0, "poisson").verdict == Verdict::kPass);
  }
  SECTION("constant counts fail on zero variance") {
    std::vector<double> xs(1000, 3.0);
    CHECK(poisson_dispersion(xs, 3.0, "constant").verdict == Verdict::kFail);
  }
  SECTION("geometric counts fail on overdispersion") {
    Rng rng = Rng::stream(307, 1);
    std::vector<double> xs(10000);
    for (auto& x : xs) x = geometric(rng, 0.25);  // mean 3, variance 12
    CHECK(poisson_dispersion(xs, 3.0, "geometric").verdict == Verdict::kFail);
  }
  SECTION("wrong mean fails even with Poisson dispersion") {
    Rng rng = Rng::stream(307, 2);
    auto xs = poisson_sample(rng, 3.0, 10000);
    CHECK(poisson_dispersion(xs, 3.3, "off-mean").verdict == Verdict::kFail);
  }
}

TEST_CASE("mean versus target") {
  Rng rng = Rng::stream(311, 0);
  std::vector<double> xs(5000);
  for (auto& x : xs) x = rng.normal() + 1.0;
  CHECK(mean_vs_target(xs, 1.0, "centered").verdict == Verdict::kPass);
  CHECK(mean_vs_target(xs, 1.5, "offset").verdict == Verdict::kFail);
  // a bias allowance absorbs a known systematic offset
  CHECK(mean_vs_target(xs, 1.5, "offset with bias", 0.5).verdict ==
        Verdict::kPass);
}

TEST_CASE("type-I calibration at the acceptance level") {
  // each test should reject a true null at rate alpha, within the band
  // alpha + 2 sqrt(alpha (1-alpha) / m) over m meta-replicates
  const int m = 2000;
  const double band = kAlpha + 2.0 * std::sqrt(kAlpha * (1.0 - kAlpha) / m);
  SECTION("KS") {
    int rejects = 0;
    for (int i = 0; i < m; ++i) {
      Rng rng = Rng::stream(313, i);
      auto xs = exp_sample(rng, 1.0, 500);
      auto ys = exp_sample(rng, 1.0, 500);
      if (ks_two_sample(xs, ys, "cal").verdict == Verdict::kFail) ++rejects;
    }
    CHECK(static_cast<double>(rejects) / m <= band);
  }
  SECTION("chi-square") {
    int rejects = 0;
    std::vector<double> probs(6, 1.0 / 6.0);
    for (int i = 0; i < m; ++i) {
      Rng rng = Rng::stream(317, i);
      std::vector<double> counts(6, 0.0);
      for (int k = 0; k < 600; ++k) counts[rng.next_u64() % 6] += 1.0;
      if (chi_square_gof(counts, probs, "cal").verdict == Verdict::kFail)
        ++rejects;
    }
    CHECK(static_cast<double>(rejects) / m <= band);
  }
  SECTION("poisson dispersion") {
    int rejects = 0;
    for (int i = 0; i < m; ++i) {
      Rng rng = Rng::stream(319, i);
      auto xs = poisson_sample(rng, 3.0, 500);
      if (poisson_dispersion(xs, 3.0, "cal").verdict == Verdict::kFail)
        ++rejects;
    }
    CHECK(static_cast<double>(rejects) / m <= band);
  }
}

TEST_CASE("report CSV schema") {
  SECTION("deterministic reports are byte-identical") {
    auto run = [] {
      Rng rng = Rng::stream(323, 0);
      auto xs = exp_sample(rng, 1.0, 200);
      auto ys = exp_sample(rng, 1.0, 200);
      std::vector<StatReport> reports = {
          ks_two_sample(xs, ys, "a"),
          mean_vs_target(xs, 1.0, "b"),
      };
      std::ostringstream os;
      write_report_csv(os, reports);
      return os.str();
    };
    CHECK(run() == run());
  }
  SECTION("RFC-4180 quoting") {
    CHECK(csv_quote("plain") == "plain");
    CHECK(csv_quote("a,b") == "\"a,b\"");
    CHECK(csv_quote("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_quote("line\nbreak") == "\"line\nbreak\"");
  }
  SECTION("header and empty optionals") {
    StatReport r;
    r.name = "only,name";
    std::ostringstream os;
    write_report_csv(os, {r});
    std::string first, second;
    std::istringstream is(os.str());
    std::getline(is, first);
    std::getline(is, second);
    CHECK(first ==
          "check-name,statistic,estimate,ci_low,ci_high,target,p_value,"
          "verdict");
    CHECK(second == "\"only,name\",0,0,0,0,,,warn");
  }
}

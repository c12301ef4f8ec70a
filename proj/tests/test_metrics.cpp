#include <doctest.h>

#include "oracles.hpp"
#include "test_util.hpp"
#include "vstain/metrics.hpp"

using namespace vstain;

TEST_CASE("evaluate_pair matches loop references") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const ImageD p = test::random_image(40, 33, seed);
    const ImageD g = test::random_image(40, 33, seed + 100);
    const MetricRow row = evaluate_pair(p.cast<float>(), g.cast<float>(), Organelle::Nucleus, "r");
    const ImageD pf = p.cast<float>().cast<double>(), gf = g.cast<float>().cast<double>();
    CHECK(*row.mae == doctest::Approx(oracle::mae(pf, gf)).epsilon(1e-9));
    CHECK(row.ssim == doctest::Approx(oracle::ssim(pf, gf)).epsilon(1e-9));
    CHECK(row.pcc == doctest::Approx(oracle::pcc(pf, gf)).epsilon(1e-9));
    CHECK(*row.cd == doctest::Approx(oracle::cosine_distance(pf, gf)).epsilon(1e-9));
    CHECK(*row.ed == doctest::Approx(oracle::ed(pf, gf)).epsilon(1e-9));
    CHECK(*row.ed * *row.ed == doctest::Approx(pf.size() * oracle::mse(pf, gf)).epsilon(1e-9));
  }
}

TEST_CASE("identical images score perfectly") {
  const ImageF p = test::random_image(20, 20, 7).cast<float>();
  const MetricRow row = evaluate_pair(p, p, Organelle::Mitochondria);
  CHECK(*row.mae == 0.0);
  CHECK(*row.ed == 0.0);
  CHECK(row.ssim == doctest::Approx(1.0));
  CHECK(row.pcc == doctest::Approx(1.0));
  CHECK(*row.cd == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("tubulin and actin rows carry only SSIM and PCC") {
  const ImageF p = test::random_image(16, 16, 1).cast<float>();
  const ImageF g = test::random_image(16, 16, 2).cast<float>();
  for (Organelle o : {Organelle::Tubulin, Organelle::Actin}) {
    const MetricRow row = evaluate_pair(p, g, o);
    CHECK_FALSE(row.mae.has_value());
    CHECK_FALSE(row.cd.has_value());
    CHECK_FALSE(row.ed.has_value());
    CHECK(metrics_for(o) == std::vector{Metric::Ssim, Metric::Pcc});
  }
  CHECK(metrics_for(Organelle::Nucleus).size() == 5);
  CHECK_THROWS_AS(evaluate_pair(p, test::random_image(16, 15, 2).cast<float>(), Organelle::Nucleus),
                  std::invalid_argument);
}

TEST_CASE("aggregate averages per organelle and metric") {
  std::vector<MetricRow> rows(3);
  rows[0].organelle = Organelle::Nucleus;
  rows[0].ssim = 0.5;
  rows[0].pcc = 0.2;
  rows[0].mae = 0.1;
  rows[0].cd = 0.3;
  rows[0].ed = 4.0;
  rows[1] = rows[0];
  rows[1].ssim = 0.7;
  rows[1].ed = 6.0;
  rows[2].organelle = Organelle::Actin;
  rows[2].ssim = 0.9;
  rows[2].pcc = 0.4;
  const AggregateReport rep = aggregate(rows);
  CHECK(*rep.mean(Organelle::Nucleus, Metric::Ssim) == doctest::Approx(0.6));
  CHECK(*rep.mean(Organelle::Nucleus, Metric::Ed) == doctest::Approx(5.0));
  CHECK(*rep.mean(Organelle::Actin, Metric::Pcc) == doctest::Approx(0.4));
  CHECK_FALSE(rep.mean(Organelle::Actin, Metric::Mae).has_value());
  CHECK_FALSE(rep.mean(Organelle::Tubulin, Metric::Ssim).has_value());
  CHECK(rep.entries().size() == 7);
  CHECK(rep.to_csv().rfind("organelle,metric,mean,n\nnucleus,mae,0.1,2\n", 0) == 0);
  CHECK(rep.to_text().find("SSIM↑") != std::string::npos);
  CHECK(rep.to_text().find("MAE↓") != std::string::npos);
  CHECK_THROWS_AS(aggregate(std::vector<MetricRow>{}), std::invalid_argument);

  const std::string table = ablation_table("b) Test", {{"Alpha", rep}});
  CHECK(table.rfind("b) Test\nMethod | Nucleus", 0) == 0);
  CHECK(table.find("Alpha  |    0.1000   0.6000") != std::string::npos);
  CHECK(table.find("       -        -") != std::string::npos);
  const std::string csv = ablation_csv("objective", {{"Alpha", rep}});
  CHECK(csv.find("objective,Alpha,actin,ssim,0.9,1") != std::string::npos);
}

TEST_CASE("Wilcoxon signed-rank p-values") {
  SUBCASE("all six differences positive") {
    const std::vector<double> a = {1.1, 2.3, 3.2, 4.8, 5.5, 6.1}, b(6, 0.0);
    CHECK(wilcoxon_signed_rank(a, b) == doctest::Approx(0.03125).epsilon(1e-12));
  }
  SUBCASE("exact distribution with mixed signs") {
    const std::vector<double> d = {0.5, -1.2, 2.0, 3.1, -0.4, 1.7, 2.2, 0.9}, z(8, 0.0);
    CHECK(wilcoxon_signed_rank(d, z) == doctest::Approx(0.078125).epsilon(1e-12));
  }
  SUBCASE("normal approximation with ties and a zero") {
    const std::vector<double> d = {3.8,  0.0, -2.0, 2.3, 3.2,  -1.3, -1.1, 3.4,  2.0,  -2.1, 0.4, 3.8, 0.5,
                                   -2.1, 1.9, 3.4,  -1.0, -1.4, 3.1, 2.4,  -1.9, -0.1, 3.8, 0.9, -2.2};
    const std::vector<double> z(d.size(), 0.0);
    CHECK(wilcoxon_signed_rank(d, z) == doctest::Approx(0.08634782098366248).epsilon(1e-9));
  }
  SUBCASE("symmetric in argument order") {
    const std::vector<double> a = {0.3, 0.9, 0.1, 0.7, 0.2, 0.8, 0.5}, b = {0.2, 0.4, 0.6, 0.1, 0.9, 0.3, 0.0};
    CHECK(wilcoxon_signed_rank(a, b) == doctest::Approx(wilcoxon_signed_rank(b, a)));
  }
  SUBCASE("too few nonzero pairs") {
    const std::vector<double> a = {1, 2, 3, 4, 5}, b = {0, 0, 0, 0, 0};
    CHECK_THROWS_AS(wilcoxon_signed_rank(a, b), WilcoxonError);
    CHECK_THROWS_AS(wilcoxon_signed_rank(b, b), WilcoxonError);
    CHECK_THROWS_AS(wilcoxon_signed_rank(a, std::vector<double>{1, 2}), WilcoxonError);
  }
}

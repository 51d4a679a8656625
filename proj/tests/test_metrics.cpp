#include "doctest.h"
#include "mcae/metrics.hpp"

using namespace mcae;

TEST_CASE("metric_rel") {
  Mat truth(2, 3);
  truth << 1, 2, 3, 4, 5, 6;
  SUBCASE("exact prediction gives zero") {
    CHECK(metric_rel(truth, truth) == 0.0);
  }
  SUBCASE("doubling gives one") {
    CHECK(metric_rel(Mat(2.0 * truth), truth) == doctest::Approx(1.0));
  }
  SUBCASE("zero-norm truth column names the column") {
    Mat bad = truth;
    bad.col(1).setZero();
    try {
      (void)metric_rel(truth, bad);
      FAIL("expected MetricError");
    } catch (const MetricError& e) {
      CHECK(std::string(e.what()).find("column 1") != std::string::npos);
    }
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS((void)metric_rel(Mat::Zero(2, 2), truth), MetricError);
  }
}

TEST_CASE("metric_abs_pointwise") {
  Mat truth(3, 2);
  truth << 1, 1, 2, 2, 3, 3;
  SUBCASE("exact prediction gives the zero vector") {
    CHECK(metric_abs_pointwise(truth, truth).norm() == 0.0);
  }
  SUBCASE("single sample, unit basis offset") {
    Mat pred = truth.col(0);
    Mat t = truth.col(0);
    pred(1, 0) += 1.0;
    Vec e = metric_abs_pointwise(pred, t);
    CHECK(e(0) == 0.0);
    CHECK(e(1) == 1.0);
    CHECK(e(2) == 0.0);
  }
  SUBCASE("consistency with metric_rel at zero error") {
    Mat pred = truth;
    CHECK(metric_rel(pred, truth) == 0.0);
    CHECK(metric_abs_pointwise(pred, truth).maxCoeff() == 0.0);
  }
}

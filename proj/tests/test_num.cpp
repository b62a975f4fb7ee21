#include <doctest.h>

#include <cmath>
#include <vector>

#include "tbw/num.hpp"

using namespace tbw;

// reference values computed with scipy.stats / scipy.special
TEST_CASE("incomplete beta matches reference values") {
  CHECK(num::incomplete_beta(2.0, 3.0, 0.4) == doctest::Approx(0.5247999999999999).epsilon(1e-12));
  CHECK(num::incomplete_beta(0.5, 0.5, 0.3) == doctest::Approx(0.36901011956554536).epsilon(1e-12));
  CHECK(num::incomplete_beta(5.0, 2.0, 0.8) == doctest::Approx(0.65536).epsilon(1e-12));
  CHECK(num::incomplete_beta(10.0, 10.0, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(num::incomplete_beta(2.0, 3.0, 0.0) == 0.0);
  CHECK(num::incomplete_beta(2.0, 3.0, 1.0) == 1.0);
}

TEST_CASE("student t two-sided p matches reference values") {
  CHECK(num::student_t_two_sided_p(2.0, 5.0) == doctest::Approx(0.10193947882985828).epsilon(1e-10));
  CHECK(num::student_t_two_sided_p(0.5, 1.0) == doctest::Approx(0.7048327646991336).epsilon(1e-10));
  CHECK(num::student_t_two_sided_p(12.247448713915889, 4.0) ==
        doctest::Approx(0.00025521674944192687).epsilon(1e-9));
  CHECK(num::student_t_two_sided_p(3.3, 17.5) == doctest::Approx(0.004101171342871801).epsilon(1e-9));
}

TEST_CASE("chi-square survival function matches reference values") {
  CHECK(num::chi_square_sf(3.0, 2.0) == doctest::Approx(0.22313016014842982).epsilon(1e-10));
  CHECK(num::chi_square_sf(10.0, 5.0) == doctest::Approx(0.07523524614651217).epsilon(1e-10));
  CHECK(num::chi_square_sf(1.5, 1.0) == doctest::Approx(0.22067136191984324).epsilon(1e-10));
  CHECK(num::chi_square_sf(27.2, 11.0) == doctest::Approx(0.004286018871358351).epsilon(1e-9));
}

TEST_CASE("ranks with ties") {
  std::vector<double> xs{3.0, 1.0, 2.0, 2.0};
  auto r = num::ranks_with_ties(xs);
  CHECK(r[0] == 4.0);
  CHECK(r[1] == 1.0);
  CHECK(r[2] == 2.5);
  CHECK(r[3] == 2.5);
}

TEST_CASE("spearman on a monotone sequence") {
  std::vector<double> xs{0.1, 0.2, 0.3, 0.4};
  std::vector<double> up{1.0, 2.0, 3.0, 4.0};
  std::vector<double> down{4.0, 3.0, 2.0, 1.0};
  CHECK(num::spearman_rho(xs, up) == doctest::Approx(1.0));
  CHECK(num::spearman_rho(xs, down) == doctest::Approx(-1.0));
}

TEST_CASE("fnv1a64 is stable") {
  CHECK(num::fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(num::fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(num::fnv1a64("hello") == num::fnv1a64("hello"));
  CHECK(num::fnv1a64("hello") != num::fnv1a64("hellp"));
}

TEST_CASE("log_sigmoid is stable at extremes") {
  CHECK(std::isfinite(num::log_sigmoid(-745.0)));
  CHECK(num::log_sigmoid(50.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(num::sigmoid(0.0) == doctest::Approx(0.5));
}

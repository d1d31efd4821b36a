#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numbers>
#include <random>
#include <vector>

#include "hjtlt/errors.hpp"
#include "hjtlt/grid.hpp"

using namespace hjtlt;

namespace {

std::shared_ptr<Grid> line(int n, bool periodic = false) {
  return std::make_shared<Grid>(std::vector<double>{-1.0}, std::vector<double>{1.0},
                                std::vector<int>{n}, std::vector<bool>{periodic});
}

std::filesystem::path temp_file(const char* stem) {
  return std::filesystem::temp_directory_path() /
         (std::string(stem) + std::to_string(::getpid()));
}

}  // namespace

TEST_CASE("spacing: closed interval vs periodic identification") {
  Grid closed({0.0}, {1.0}, {5}, {false});
  CHECK(closed.spacing()[0] == doctest::Approx(0.25));
  CHECK(closed.coordinate(0, 4) == doctest::Approx(1.0));
  Grid wrap({0.0}, {1.0}, {5}, {true});
  CHECK(wrap.spacing()[0] == doctest::Approx(0.2));
  CHECK(wrap.coordinate(0, 4) == doctest::Approx(0.8));  // one spacing short of hi
}

TEST_CASE("grid constructor validations") {
  CHECK_THROWS_AS(Grid({}, {}, {}, {}), ValidationError);
  CHECK_THROWS_AS(Grid({0.0}, {1.0}, {2}, {false}), ValidationError);   // < 3 points
  CHECK_THROWS_AS(Grid({1.0}, {0.0}, {5}, {false}), ValidationError);   // hi <= lo
  CHECK_THROWS_AS(Grid({0.0, 0.0}, {1.0}, {5, 5}, {false, false}), ValidationError);
}

TEST_CASE("flat_index and unflatten are inverse, row-major") {
  Grid g({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, {3, 4, 5}, {false, false, false});
  REQUIRE(g.size() == 60);
  // last dimension contiguous
  std::vector<int> a{1, 2, 3}, b{1, 2, 4};
  CHECK(g.flat_index(b) == g.flat_index(a) + 1);
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    int idx[3];
    g.unflatten(flat, idx);
    CHECK(g.flat_index(std::span<const int>(idx, 3)) == flat);
  }
}

TEST_CASE("shifted wraps periodic dimensions and clamps closed ones") {
  Grid g({0.0, 0.0}, {1.0, 1.0}, {4, 4}, {true, false});
  bool clamped = true;
  std::vector<int> corner{0, 0};
  const std::size_t at = g.flat_index(corner);
  CHECK(g.shifted(at, 0, -1, clamped) == g.flat_index(std::vector<int>{3, 0}));
  CHECK_FALSE(clamped);
  CHECK(g.shifted(at, 1, -1, clamped) == at);
  CHECK(clamped);
  CHECK(g.shifted(at, 0, 5, clamped) == g.flat_index(std::vector<int>{1, 0}));
  CHECK_FALSE(clamped);
}

TEST_CASE("one-sided differences see the kink of |x|") {
  auto g = line(21);  // spacing 0.1, grid point at x = 0
  ValueField v(g);
  for (std::size_t i = 0; i < g->size(); ++i)
    v[i] = std::abs(g->coordinate(0, static_cast<int>(i)));
  const std::size_t mid = 10;
  CHECK(left_diff(v, mid, 0) == doctest::Approx(-1.0));
  CHECK(right_diff(v, mid, 0) == doctest::Approx(1.0));
  // boundary copies the interior side
  CHECK(left_diff(v, 0, 0) == right_diff(v, 0, 0));
  CHECK(right_diff(v, g->size() - 1, 0) == left_diff(v, g->size() - 1, 0));
}

TEST_CASE("upwind_gradients matches pointwise differences") {
  Grid g({0.0, 0.0}, {1.0, 2.0}, {5, 7}, {false, true});
  auto gp = std::make_shared<Grid>(g);
  ValueField v(gp);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  for (auto& x : v.data()) x = val(rng);
  UpwindGradients ug = upwind_gradients(v);
  for (int d = 0; d < 2; ++d)
    for (std::size_t i = 0; i < v.data().size(); ++i) {
      CHECK(ug.left[d][i] == left_diff(v, i, d));
      CHECK(ug.right[d][i] == right_diff(v, i, d));
    }
}

TEST_CASE("multilinear interpolation reproduces affine fields exactly") {
  auto gp = std::make_shared<Grid>(std::vector<double>{-1.0, 0.0}, std::vector<double>{1.0, 2.0},
                                   std::vector<int>{9, 11}, std::vector<bool>{false, false});
  ValueField v(gp);
  auto f = [](double x, double y) { return 2.0 * x - 0.5 * y + 0.25; };
  std::size_t flat = 0;
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 11; ++j, ++flat)
      v[flat] = f(gp->coordinate(0, i), gp->coordinate(1, j));
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> ux(-1.0, 1.0), uy(0.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double x = ux(rng), y = uy(rng);
    CHECK(interpolate(v, std::vector<double>{x, y}) == doctest::Approx(f(x, y)).epsilon(1e-12));
    auto grad = interpolate_gradient(v, std::vector<double>{x, y});
    CHECK(grad[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(grad[1] == doctest::Approx(-0.5).epsilon(1e-12));
  }
}

TEST_CASE("interpolation wraps periodic dimensions") {
  const double pi = std::numbers::pi;
  auto gp = std::make_shared<Grid>(std::vector<double>{-pi}, std::vector<double>{pi},
                                   std::vector<int>{64}, std::vector<bool>{true});
  ValueField v(gp);
  for (std::size_t i = 0; i < gp->size(); ++i)
    v[i] = std::sin(gp->coordinate(0, static_cast<int>(i)));
  // query inside the seam cell between the last stored point and lo + 2*pi
  const double theta = pi - 0.25 * gp->spacing()[0];
  const double got = interpolate(v, std::vector<double>{theta});
  CHECK(got == doctest::Approx(std::sin(theta)).epsilon(5e-3));
  // a full period away lands on the same value exactly
  CHECK(interpolate(v, std::vector<double>{theta - 2 * pi}) == got);
}

TEST_CASE("interpolation rejects points outside closed dimensions") {
  auto gp = line(5);
  ValueField v(gp, 1.0);
  CHECK_THROWS_AS(interpolate(v, std::vector<double>{1.5}), ValidationError);
  CHECK_THROWS_AS(interpolate(v, std::vector<double>{-1.0001}), ValidationError);
  CHECK_THROWS_AS(interpolate(v, std::vector<double>{0.0, 0.0}), ValidationError);
  CHECK_NOTHROW(interpolate(v, std::vector<double>{1.0}));  // boundary itself is fine
}

TEST_CASE("timed field constructor validates the time axis") {
  auto gp = line(3);
  ValueField s(gp, 0.0);
  CHECK_THROWS_AS(TimedValueField({0.1, 0.0}, {s, s}), ValidationError);   // must start at 0
  CHECK_THROWS_AS(TimedValueField({0.0, 0.1}, {s, s}), ValidationError);   // must decrease
  CHECK_THROWS_AS(TimedValueField({0.0, -0.1, -0.3}, {s, s, s}), ValidationError);  // uniform
  CHECK_NOTHROW(TimedValueField({0.0, -0.1, -0.2}, {s, s, s}));
}

TEST_CASE("slice_index rounds to nearest, ties toward the more negative time") {
  auto gp = line(3);
  ValueField s(gp, 0.0);
  TimedValueField v({0.0, -0.5, -1.0}, {s, s, s});
  CHECK(v.dt() == doctest::Approx(0.5));
  CHECK(v.horizon() == doctest::Approx(1.0));
  CHECK(v.slice_index(0.0) == 0);
  CHECK(v.slice_index(-0.2) == 0);
  CHECK(v.slice_index(-0.25) == 1);   // exact midpoint: more negative sample
  CHECK(v.slice_index(-0.3) == 1);
  CHECK(v.slice_index(-0.75) == 2);   // midpoint again
  CHECK(v.slice_index(-1.0) == 2);
  CHECK_THROWS_AS(v.slice_index(-1.7), ValidationError);
  CHECK_THROWS_AS(v.slice_index(0.5), ValidationError);
}

TEST_CASE("interpolate_timed selects the slice nearest -T + t") {
  auto gp = line(3);
  ValueField a(gp, 1.0), b(gp, 2.0), c(gp, 3.0);
  TimedValueField v({0.0, -0.5, -1.0}, {a, b, c});
  // t = 0 is deployment start: backward time -T
  CHECK(interpolate_timed(v, std::vector<double>{0.0}, 0.0) == doctest::Approx(3.0));
  CHECK(interpolate_timed(v, std::vector<double>{0.0}, 0.5) == doctest::Approx(2.0));
  CHECK(interpolate_timed(v, std::vector<double>{0.0}, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("binary round trip is bit exact") {
  auto gp = std::make_shared<Grid>(std::vector<double>{0.0, -1.0}, std::vector<double>{2.0, 1.0},
                                   std::vector<int>{4, 3}, std::vector<bool>{false, true});
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> val(-5.0, 5.0);
  std::vector<ValueField> slices;
  for (int k = 0; k < 3; ++k) {
    ValueField s(gp);
    for (auto& x : s.data()) x = val(rng);
    slices.push_back(std::move(s));
  }
  TimedValueField v({0.0, -0.25, -0.5}, std::move(slices));
  const auto path = temp_file("hjtlt_grid_roundtrip_");
  write_field_binary(path.string(), v);
  TimedValueField back = read_field_binary(path.string());
  REQUIRE(back.times() == v.times());
  REQUIRE(back.grid() == v.grid());
  for (std::size_t k = 0; k < 3; ++k) CHECK(back.slices()[k].data() == v.slices()[k].data());
  // the same content writes the same bytes
  const auto path2 = temp_file("hjtlt_grid_roundtrip2_");
  write_field_binary(path2.string(), back);
  std::ifstream f1(path.string(), std::ios::binary), f2(path2.string(), std::ios::binary);
  std::string b1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string b2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(b1 == b2);
  for (const auto& p : {path, path2}) {
    std::filesystem::remove(p);
    std::filesystem::remove(p.string() + ".json");
  }
}

TEST_CASE("truncated binary payload is rejected") {
  auto gp = line(5);
  ValueField s(gp, 1.5);
  const auto path = temp_file("hjtlt_grid_trunc_");
  write_field_binary(path.string(), s);
  std::filesystem::resize_file(path, 3 * sizeof(double));
  CHECK_THROWS_AS(read_field_binary(path.string()), Error);
  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".json");
}

TEST_CASE("CSV export carries coordinates and full-precision values") {
  auto gp = std::make_shared<Grid>(std::vector<double>{0.0, 0.0}, std::vector<double>{1.0, 1.0},
                                   std::vector<int>{3, 3}, std::vector<bool>{false, false});
  ValueField v(gp);
  for (std::size_t i = 0; i < 9; ++i) v[i] = static_cast<double>(i) / 3.0;
  const auto path = temp_file("hjtlt_grid_csv_");
  write_field_csv(path.string(), v);
  std::ifstream in(path.string());
  std::string header;
  std::getline(in, header);
  CHECK(header == "x,y,value");
  int rows = 0;
  double x, y, val;
  char comma;
  while (in >> x >> comma >> y >> comma >> val) {
    const std::size_t flat = static_cast<std::size_t>(std::lround(x * 2) * 3 + std::lround(y * 2));
    CHECK(val == v[flat]);  // precision 17 survives the round trip
    ++rows;
  }
  CHECK(rows == 9);
  std::filesystem::remove(path);

  auto g3 = std::make_shared<Grid>(std::vector<double>{0, 0, 0}, std::vector<double>{1, 1, 1},
                                   std::vector<int>{3, 3, 3},
                                   std::vector<bool>{false, false, false});
  CHECK_THROWS_AS(write_field_csv("/tmp/never_written.csv", ValueField(g3)), ValidationError);
}

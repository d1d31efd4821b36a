#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace hjtlt {

class Grid;
class ValueField;

// Implicit set over the state space. eval_surface() returns a signed
// surface value: negative inside, positive outside, zero on the boundary.
// Box values are exact signed distances along each axis combined with max;
// union/intersection/complement use min/max/negation, so nested values are
// signed-distance-like but not exact distances (the usual level-set
// surrogate).
class SetExpr {
 public:
  enum class Kind { Box, HalfSpace, Union, Intersection, Complement, All, Empty };

  // Axis-aligned box [lo, hi] over the dimensions `dims` (default: 0..n-1).
  // A box over a strict subset of dimensions leaves the others free.
  static SetExpr box(std::vector<double> lo, std::vector<double> hi);
  static SetExpr box(std::vector<int> dims, std::vector<double> lo, std::vector<double> hi);
  // { z : z[dim] <= threshold } or >= when `geq` is set.
  static SetExpr half_space(int dim, double threshold, bool geq = false);
  static SetExpr set_union(std::vector<SetExpr> children);
  static SetExpr set_intersection(std::vector<SetExpr> children);
  static SetExpr complement(SetExpr child);
  static SetExpr all();
  static SetExpr empty();

  Kind kind() const { return node_->kind; }
  const std::vector<SetExpr>& children() const { return node_->children; }

  double eval_surface(std::span<const double> z) const;
  bool contains(std::span<const double> z) const { return eval_surface(z) <= 0.0; }

  // JSON text encoding used by scenario files, e.g.
  //   {"type":"box","lo":[-1],"hi":[1]}
  //   {"type":"halfspace","dim":0,"threshold":3.0,"op":"le"}
  //   {"type":"union","children":[...]} / "intersection" / {"type":"complement","child":...}
  //   {"type":"all"} / {"type":"empty"}
  static SetExpr from_json_text(const std::string& text);
  std::string to_json_text() const;

 private:
  struct Node {
    Kind kind;
    std::vector<int> dims;           // Box
    std::vector<double> lo, hi;      // Box
    int dim = 0;                     // HalfSpace
    double threshold = 0.0;          // HalfSpace
    bool geq = false;                // HalfSpace
    std::vector<SetExpr> children;   // Union / Intersection / Complement
  };
  explicit SetExpr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;

  friend struct SetExprAccess;
};

// Surrogate magnitude standing in for +/- infinity in surface values.
inline constexpr double kUnboundedSurface = 1e9;

// Atom name -> region, plus the state dimension the regions live in.
struct Labeling {
  int state_dim = 0;
  std::map<std::string, SetExpr> regions;
};

// Sample eval_surface at every grid point. Throws ValidationError if the
// expression references a dimension outside the grid's.
ValueField discretize(const SetExpr& expr, std::shared_ptr<const Grid> grid);

}  // namespace hjtlt

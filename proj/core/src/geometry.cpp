#include "hjtlt/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "hjtlt/errors.hpp"
#include "hjtlt/grid.hpp"

namespace hjtlt {

struct SetExprAccess {
  using Node = SetExpr::Node;
  static SetExpr wrap(Node n) { return SetExpr(std::make_shared<const Node>(std::move(n))); }
  static const Node& node(const SetExpr& e) { return *e.node_; }
};

using SA = SetExprAccess;

SetExpr SetExpr::box(std::vector<double> lo, std::vector<double> hi) {
  std::vector<int> dims(lo.size());
  for (std::size_t d = 0; d < dims.size(); ++d) dims[d] = static_cast<int>(d);
  return box(std::move(dims), std::move(lo), std::move(hi));
}

SetExpr SetExpr::box(std::vector<int> dims, std::vector<double> lo, std::vector<double> hi) {
  if (dims.empty() || dims.size() != lo.size() || lo.size() != hi.size())
    throw ValidationError("box needs matching, non-empty dims/lo/hi");
  for (std::size_t d = 0; d < dims.size(); ++d) {
    if (dims[d] < 0) throw ValidationError("box dimension index must be non-negative");
    if (!(hi[d] >= lo[d])) throw ValidationError("box needs hi >= lo in every dimension");
  }
  SA::Node n;
  n.kind = Kind::Box;
  n.dims = std::move(dims);
  n.lo = std::move(lo);
  n.hi = std::move(hi);
  return SA::wrap(std::move(n));
}

SetExpr SetExpr::half_space(int dim, double threshold, bool geq) {
  if (dim < 0) throw ValidationError("half-space dimension index must be non-negative");
  SA::Node n;
  n.kind = Kind::HalfSpace;
  n.dim = dim;
  n.threshold = threshold;
  n.geq = geq;
  return SA::wrap(std::move(n));
}

SetExpr SetExpr::set_union(std::vector<SetExpr> children) {
  SA::Node n;
  n.kind = Kind::Union;
  n.children = std::move(children);
  return SA::wrap(std::move(n));
}

SetExpr SetExpr::set_intersection(std::vector<SetExpr> children) {
  SA::Node n;
  n.kind = Kind::Intersection;
  n.children = std::move(children);
  return SA::wrap(std::move(n));
}

SetExpr SetExpr::complement(SetExpr child) {
  SA::Node n;
  n.kind = Kind::Complement;
  n.children.push_back(std::move(child));
  return SA::wrap(std::move(n));
}

SetExpr SetExpr::all() {
  SA::Node n;
  n.kind = Kind::All;
  return SA::wrap(std::move(n));
}

SetExpr SetExpr::empty() {
  SA::Node n;
  n.kind = Kind::Empty;
  return SA::wrap(std::move(n));
}

double SetExpr::eval_surface(std::span<const double> z) const {
  const SA::Node& n = *node_;
  switch (n.kind) {
    case Kind::Box: {
      double worst = -kUnboundedSurface;
      for (std::size_t d = 0; d < n.dims.size(); ++d) {
        const int dim = n.dims[d];
        if (dim >= static_cast<int>(z.size()))
          throw ValidationError("set expression references dimension " + std::to_string(dim) +
                                " beyond the state dimension");
        const double v = std::max(n.lo[d] - z[dim], z[dim] - n.hi[d]);
        worst = std::max(worst, v);
      }
      return worst;
    }
    case Kind::HalfSpace: {
      if (n.dim >= static_cast<int>(z.size()))
        throw ValidationError("set expression references dimension " + std::to_string(n.dim) +
                              " beyond the state dimension");
      return n.geq ? n.threshold - z[n.dim] : z[n.dim] - n.threshold;
    }
    case Kind::Union: {
      double best = kUnboundedSurface;
      for (const SetExpr& c : n.children) best = std::min(best, c.eval_surface(z));
      return best;
    }
    case Kind::Intersection: {
      double worst = -kUnboundedSurface;
      for (const SetExpr& c : n.children) worst = std::max(worst, c.eval_surface(z));
      return worst;
    }
    case Kind::Complement:
      return -n.children[0].eval_surface(z);
    case Kind::All:
      return -kUnboundedSurface;
    case Kind::Empty:
      return kUnboundedSurface;
  }
  throw Error("unreachable set expression kind");
}

namespace {

nlohmann::json to_json(const SetExpr& e) {
  const auto& n = SA::node(e);
  nlohmann::json j;
  switch (e.kind()) {
    case SetExpr::Kind::Box: {
      j["type"] = "box";
      j["lo"] = n.lo;
      j["hi"] = n.hi;
      j["dims"] = n.dims;
      break;
    }
    case SetExpr::Kind::HalfSpace:
      j["type"] = "halfspace";
      j["dim"] = n.dim;
      j["threshold"] = n.threshold;
      j["op"] = n.geq ? "ge" : "le";
      break;
    case SetExpr::Kind::Union:
    case SetExpr::Kind::Intersection: {
      j["type"] = e.kind() == SetExpr::Kind::Union ? "union" : "intersection";
      nlohmann::json kids = nlohmann::json::array();
      for (const SetExpr& c : n.children) kids.push_back(to_json(c));
      j["children"] = std::move(kids);
      break;
    }
    case SetExpr::Kind::Complement:
      j["type"] = "complement";
      j["child"] = to_json(n.children[0]);
      break;
    case SetExpr::Kind::All:
      j["type"] = "all";
      break;
    case SetExpr::Kind::Empty:
      j["type"] = "empty";
      break;
  }
  return j;
}

SetExpr from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("type"))
    throw ValidationError("set expression must be an object with a 'type' field");
  const std::string type = j.at("type").get<std::string>();
  if (type == "box") {
    auto lo = j.at("lo").get<std::vector<double>>();
    auto hi = j.at("hi").get<std::vector<double>>();
    if (j.contains("dims"))
      return SetExpr::box(j.at("dims").get<std::vector<int>>(), std::move(lo), std::move(hi));
    return SetExpr::box(std::move(lo), std::move(hi));
  }
  if (type == "halfspace") {
    const std::string op = j.value("op", "le");
    if (op != "le" && op != "ge")
      throw ValidationError("halfspace op must be 'le' or 'ge'");
    return SetExpr::half_space(j.at("dim").get<int>(), j.at("threshold").get<double>(),
                               op == "ge");
  }
  if (type == "union" || type == "intersection") {
    std::vector<SetExpr> kids;
    for (const auto& c : j.at("children")) kids.push_back(from_json(c));
    return type == "union" ? SetExpr::set_union(std::move(kids))
                           : SetExpr::set_intersection(std::move(kids));
  }
  if (type == "complement") return SetExpr::complement(from_json(j.at("child")));
  if (type == "all") return SetExpr::all();
  if (type == "empty") return SetExpr::empty();
  throw ValidationError("unknown set expression type '" + type + "'");
}

}  // namespace

SetExpr SetExpr::from_json_text(const std::string& text) {
  try {
    return from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("bad set expression JSON: ") + e.what());
  }
}

std::string SetExpr::to_json_text() const { return to_json(*this).dump(); }

ValueField discretize(const SetExpr& expr, std::shared_ptr<const Grid> grid) {
  ValueField out(grid);
  const int dims = grid->dim();
  std::vector<double> z(dims);
  for (std::size_t i = 0; i < out.data().size(); ++i) {
    grid->point(i, z);
    out[i] = expr.eval_surface(z);
  }
  return out;
}

}  // namespace hjtlt

#include "fundom/scene.hpp"

#include <fstream>

namespace fundom {

using json = nlohmann::ordered_json;

namespace {

const json& need(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw scene_error(where, std::string("missing field '") + key + "'");
  return j.at(key);
}

double need_number(const json& j, const char* key, const std::string& where) {
  const json& v = need(j, key, where);
  if (!v.is_number()) throw scene_error(where + "/" + key, "expected a number");
  return v.get<double>();
}

std::complex<double> parse_complex(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw scene_error(where, "expected [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

Point parse_point(const SpaceModel& space, const json& j, const std::string& where) {
  if (!j.is_object()) throw scene_error(where, "expected a point object");
  Point p;
  switch (space.model()) {
    case Model::Plane:
      p = Point::plane(need_number(j, "x", where), need_number(j, "y", where));
      break;
    case Model::Disk:
      p = Point::disk(need_number(j, "u", where), need_number(j, "v", where));
      break;
    case Model::Graph:
      p = Point::graph(static_cast<int>(need_number(j, "edge", where)),
                       need_number(j, "offset", where));
      break;
  }
  if (!space.valid(p)) throw scene_error(where, "point is not valid for the space model");
  return p;
}

json point_json(const Point& p) {
  json j;
  switch (p.model) {
    case Model::Plane:
      j["x"] = p.x;
      j["y"] = p.y;
      break;
    case Model::Disk:
      j["u"] = p.x;
      j["v"] = p.y;
      break;
    case Model::Graph:
      j["edge"] = p.edge;
      j["offset"] = p.offset;
      break;
  }
  return j;
}

namespace {

SpaceModel parse_space(const json& j) {
  const std::string where = "/space";
  const json& model = need(j, "model", where);
  if (!model.is_string()) throw scene_error(where + "/model", "expected a string");
  std::string m = model.get<std::string>();
  if (m == "plane") return SpaceModel::plane();
  if (m == "disk") return SpaceModel::disk();
  if (m == "graph") {
    int nv = static_cast<int>(need_number(j, "vertices", where));
    const json& ej = need(j, "edges", where);
    if (!ej.is_array() || ej.empty()) throw scene_error(where + "/edges", "expected a non-empty array");
    std::vector<GraphEdge> edges;
    for (std::size_t i = 0; i < ej.size(); ++i) {
      const json& e = ej[i];
      std::string ew = where + "/edges/" + std::to_string(i);
      if (!e.is_array() || e.size() != 3) throw scene_error(ew, "expected [u, v, length]");
      edges.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<double>()});
    }
    try {
      return SpaceModel::graph(nv, std::move(edges));
    } catch (const std::exception& ex) {
      throw scene_error(where, ex.what());
    }
  }
  throw scene_error(where + "/model", "unknown model '" + m + "'");
}

Isometry parse_generator(const SpaceModel& space, const json& j, const std::string& where) {
  try {
    switch (space.model()) {
      case Model::Plane: {
        const json& mj = need(j, "matrix", where);
        if (!mj.is_array() || mj.size() != 2 || mj[0].size() != 2 || mj[1].size() != 2)
          throw scene_error(where + "/matrix", "expected a 2x2 matrix");
        Mat2 lin{mj[0][0].get<double>(), mj[0][1].get<double>(), mj[1][0].get<double>(),
                 mj[1][1].get<double>()};
        const json& tj = need(j, "translation", where);
        if (!tj.is_array() || tj.size() != 2)
          throw scene_error(where + "/translation", "expected [tx, ty]");
        return Isometry::plane_map(lin, tj[0].get<double>(), tj[1].get<double>());
      }
      case Model::Disk: {
        const json& mj = need(j, "mobius", where);
        Isometry g = Isometry::disk_mobius(parse_complex(need(mj, "a", where + "/mobius"), where),
                                           parse_complex(need(mj, "b", where + "/mobius"), where),
                                           parse_complex(need(mj, "c", where + "/mobius"), where),
                                           parse_complex(need(mj, "d", where + "/mobius"), where),
                                           j.value("conjugate", false));
        return g;
      }
      case Model::Graph: {
        const json& pj = need(j, "vertex_permutation", where);
        if (!pj.is_array()) throw scene_error(where + "/vertex_permutation", "expected an array");
        std::vector<int> perm;
        for (const auto& v : pj) perm.push_back(v.get<int>());
        return Isometry::graph_automorphism(space, std::move(perm));
      }
    }
  } catch (const scene_error&) {
    throw;
  } catch (const std::exception& ex) {
    throw scene_error(where, ex.what());
  }
  throw scene_error(where, "unreachable");
}

}  // namespace

Scene parse_scene(const json& doc) {
  if (!doc.is_object()) throw scene_error("/", "scene must be a JSON object");
  Scene scene;
  scene.name = doc.value("name", std::string("scene"));
  scene.space = parse_space(need(doc, "space", "/"));

  const json& gens = need(doc, "generators", "/");
  if (!gens.is_array()) throw scene_error("/generators", "expected an array");
  for (std::size_t i = 0; i < gens.size(); ++i)
    scene.generators.push_back(
        parse_generator(scene.space, gens[i], "/generators/" + std::to_string(i)));

  scene.base = parse_point(scene.space, need(doc, "base_point", "/"), "/base_point");
  const json& wj = need(doc, "window", "/");
  scene.window.center = parse_point(scene.space, need(wj, "center", "/window"), "/window/center");
  scene.window.radius = need_number(wj, "radius", "/window");
  if (!(scene.window.radius > 0)) throw scene_error("/window/radius", "must be positive");

  const json& ej = need(doc, "enumeration", "/");
  std::string guarantee = need(ej, "guarantee", "/enumeration").get<std::string>();
  if (guarantee == "exact") {
    scene.guarantee = Guarantee::Exact;
  } else if (guarantee == "heuristic") {
    scene.guarantee = Guarantee::HeuristicDepth;
    scene.depth = static_cast<int>(ej.value("depth", 12));
    if (scene.depth < 1) throw scene_error("/enumeration/depth", "must be >= 1");
  } else {
    throw scene_error("/enumeration/guarantee", "expected 'exact' or 'heuristic'");
  }

  const json& seed = need(doc, "seed", "/");
  if (!seed.is_number_unsigned() && !seed.is_number_integer())
    throw scene_error("/seed", "expected an integer seed (committed scenes pin their seeds)");
  scene.seed = seed.get<std::uint64_t>();
  scene.params = doc.value("params", json::object());
  return scene;
}

Scene load_scene(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw scene_error(path, "cannot open scene file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& ex) {
    throw scene_error(path, ex.what());
  }
  return parse_scene(doc);
}

ActionSystem make_action(const Scene& scene) {
  try {
    return ActionSystem(scene.space, scene.generators, scene.base, scene.guarantee, scene.depth);
  } catch (const std::exception& ex) {
    throw scene_error("/generators", ex.what());
  }
}

}  // namespace fundom

#ifndef FUNDOM_SCENE_HPP
#define FUNDOM_SCENE_HPP

#include <string>

#include <json.hpp>

#include "fundom/action.hpp"

namespace fundom {

class scene_error : public std::runtime_error {
 public:
  scene_error(const std::string& where, const std::string& what)
      : std::runtime_error(where + ": " + what), location(where) {}
  std::string location;
};

// Validated scene file: the space, the generating maps, the base point, the
// working window, the enumeration contract and the seeds/parameters every
// command reads.
struct Scene {
  std::string name;
  SpaceModel space{SpaceModel::plane()};
  std::vector<Isometry> generators;
  Point base;
  Window window;
  Guarantee guarantee{Guarantee::Exact};
  int depth{12};
  std::uint64_t seed{0};
  nlohmann::ordered_json params;  // command-specific block, may be empty
};

Scene load_scene(const std::string& path);
Scene parse_scene(const nlohmann::ordered_json& doc);
ActionSystem make_action(const Scene& scene);

Point parse_point(const SpaceModel& space, const nlohmann::ordered_json& j,
                  const std::string& where);
nlohmann::ordered_json point_json(const Point& p);

}  // namespace fundom

#endif  // FUNDOM_SCENE_HPP

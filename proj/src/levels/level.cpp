#include "vtools/levels/level.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "vtools/levels/attempt.hpp"
#include "vtools/physics/overlap.hpp"

namespace vtools::levels {
namespace {

using nlohmann::json;
using physics::BodyKind;
using physics::BodyRole;
using physics::ConvexPolygon;
using physics::Shape;

[[noreturn]] void schema_error(const std::string& path, const std::string& message) {
  throw LevelError(LevelError::Kind::kSchema, path, message);
}

[[noreturn]] void semantic_error(const std::string& message) {
  throw LevelError(LevelError::Kind::kSemantic, "", message);
}

// A JSON node together with its path, for error messages.
class Node {
 public:
  Node(const json& value, std::string path) : value_(&value), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return *value_; }

  Node at(const std::string& key) const {
    require_object();
    const auto it = value_->find(key);
    if (it == value_->end()) schema_error(child_path(key), "missing required field");
    return {*it, child_path(key)};
  }

  std::optional<Node> find(const std::string& key) const {
    require_object();
    const auto it = value_->find(key);
    if (it == value_->end()) return std::nullopt;
    return Node(*it, child_path(key));
  }

  std::vector<Node> items() const {
    if (!value_->is_array()) schema_error(path_, "expected an array");
    std::vector<Node> out;
    for (std::size_t i = 0; i < value_->size(); ++i) {
      out.emplace_back((*value_)[i], path_ + "[" + std::to_string(i) + "]");
    }
    return out;
  }

  double number() const {
    if (!value_->is_number()) schema_error(path_, "expected a number");
    const double v = value_->get<double>();
    if (!std::isfinite(v)) schema_error(path_, "expected a finite number");
    return v;
  }

  std::string string() const {
    if (!value_->is_string()) schema_error(path_, "expected a string");
    return value_->get<std::string>();
  }

  Vec2 vec2() const {
    const auto xs = items();
    if (xs.size() != 2) schema_error(path_, "expected [x, y]");
    return {xs[0].number(), xs[1].number()};
  }

  double number_or(const std::string& key, double fallback) const {
    const auto n = find(key);
    return n ? n->number() : fallback;
  }

 private:
  void require_object() const {
    if (!value_->is_object()) schema_error(path_, "expected an object");
  }
  std::string child_path(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json* value_;
  std::string path_;
};

ConvexPolygon read_polygon(const Node& node) {
  ConvexPolygon p;
  for (const auto& v : node.items()) p.vertices.push_back(v.vec2());
  if (p.vertices.size() < 3) schema_error(node.path(), "polygon needs at least 3 vertices");
  if (!is_convex_ccw(std::span<const Vec2>(p.vertices))) {
    schema_error(node.path(), "polygon must be convex with counter-clockwise vertices");
  }
  return p;
}

Shape read_shape(const Node& node) {
  const std::string type = node.at("type").string();
  if (type == "circle") {
    const double r = node.at("radius").number();
    if (!(r > 0)) schema_error(node.path() + ".radius", "radius must be > 0");
    return physics::Circle{r};
  }
  if (type == "polygon") return read_polygon(node.at("vertices"));
  if (type == "compound") {
    physics::Compound c;
    for (const auto& part : node.at("parts").items()) {
      physics::CompoundPart cp;
      cp.polygon = read_polygon(part.at("vertices"));
      if (const auto off = part.find("offset")) cp.offset = off->vec2();
      c.parts.push_back(std::move(cp));
    }
    if (c.parts.empty()) schema_error(node.path() + ".parts", "compound needs at least one part");
    return c;
  }
  schema_error(node.path() + ".type", "unknown shape type '" + type + "'");
}

physics::Material read_material(const std::optional<Node>& node, physics::Material fallback) {
  if (!node) return fallback;
  physics::Material m;
  m.density = node->number_or("density", fallback.density);
  m.friction = node->number_or("friction", fallback.friction);
  m.elasticity = node->number_or("elasticity", fallback.elasticity);
  if (!(m.friction >= 0)) schema_error(node->path() + ".friction", "must be >= 0");
  if (!(m.elasticity >= 0 && m.elasticity <= 1)) {
    schema_error(node->path() + ".elasticity", "must be in [0, 1]");
  }
  if (!(m.density >= 0)) schema_error(node->path() + ".density", "must be >= 0");
  return m;
}

json vec_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

json polygon_json(const ConvexPolygon& p) {
  json out = json::array();
  for (const auto& v : p.vertices) out.push_back(vec_json(v));
  return out;
}

json material_json(const physics::Material& m) {
  return {{"density", m.density}, {"friction", m.friction}, {"elasticity", m.elasticity}};
}

constexpr physics::Material kDefaultToolMaterial{1.0, 0.5, 0.2};

}  // namespace

json shape_to_json(const Shape& shape) {
  if (const auto* c = std::get_if<physics::Circle>(&shape)) {
    return {{"type", "circle"}, {"radius", c->radius}};
  }
  if (const auto* p = std::get_if<ConvexPolygon>(&shape)) {
    return {{"type", "polygon"}, {"vertices", polygon_json(*p)}};
  }
  json parts = json::array();
  for (const auto& part : std::get<physics::Compound>(shape).parts) {
    parts.push_back({{"vertices", polygon_json(part.polygon)}, {"offset", vec_json(part.offset)}});
  }
  return {{"type", "compound"}, {"parts", std::move(parts)}};
}

std::vector<int> LevelSpec::movable_indices() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < world.bodies.size(); ++i) {
    if (world.bodies[i].is_dynamic()) out.push_back(static_cast<int>(i));
  }
  return out;
}

LevelSpec load_level(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    schema_error("", std::string("not valid JSON: ") + e.what());
  }
  const Node root(doc, "");
  const std::string format = root.at("format").string();
  if (format != kLevelFormat) schema_error("format", "expected '" + std::string(kLevelFormat) + "'");

  LevelSpec level;
  level.document = std::string(document);
  level.name = root.at("name").string();
  if (level.name.empty()) schema_error("name", "must not be empty");
  if (const auto d = root.find("description")) level.description = d->string();
  if (const auto c = root.find("category")) {
    level.category = c->string();
    if (level.category != "archetype" && level.category != "calibration") {
      schema_error(c->path(), "expected 'archetype' or 'calibration'");
    }
  }
  if (const auto p = root.find("pair")) {
    level.pair = MatchedPair{p->at("group").string(), p->at("variant").string(),
                             p->at("delta").string()};
  }

  const Node bounds = root.at("bounds");
  level.world.bounds = {bounds.at("min").vec2(), bounds.at("max").vec2()};
  if (!(level.world.bounds.min.array() < level.world.bounds.max.array()).all()) {
    schema_error("bounds", "min must be below max");
  }
  if (const auto g = root.find("gravity")) level.world.gravity = g->vec2();
  level.time_limit = root.number_or("time_limit", 120.0);
  level.dwell = root.number_or("dwell", 0.5);
  level.time_horizon = root.number_or("time_horizon", 20.0);
  if (!(level.time_limit > 0)) schema_error("time_limit", "must be > 0");
  if (!(level.dwell >= 0)) schema_error("dwell", "must be >= 0");
  if (!(level.time_horizon > 0)) schema_error("time_horizon", "must be > 0");

  for (const auto& b : root.at("bodies").items()) {
    const std::string id = b.at("id").string();
    if (id.empty()) schema_error(b.path() + ".id", "must not be empty");
    if (id == kToolBodyId) schema_error(b.path() + ".id", "'tool' is reserved");
    const std::string kind = b.at("kind").string();
    if (kind != "static" && kind != "dynamic") {
      schema_error(b.path() + ".kind", "expected 'static' or 'dynamic'");
    }
    std::string role = "plain";
    if (const auto r = b.find("role")) role = r->string();
    if (role != "plain" && role != "goal-object") {
      schema_error(b.path() + ".role", "expected 'plain' or 'goal-object'");
    }
    const Node pose = b.at("pose");
    const physics::Pose p{Vec2(pose.at("x").number(), pose.at("y").number()),
                          pose.number_or("angle", 0.0)};
    const Shape shape = read_shape(b.at("shape"));
    const auto material = read_material(b.find("material"), physics::Material{});
    if (kind == "dynamic" && !(material.density > 0)) {
      schema_error(b.path() + ".material.density", "dynamic bodies need density > 0");
    }
    try {
      level.world.add(physics::make_body(id, shape,
                                         kind == "static" ? BodyKind::kStatic : BodyKind::kDynamic,
                                         role == "goal-object" ? BodyRole::kGoalObject : BodyRole::kPlain,
                                         material, p));
    } catch (const physics::ShapeError& e) {
      schema_error(b.path() + ".shape", e.what());
    } catch (const std::invalid_argument& e) {
      schema_error(b.path(), e.what());
    }
  }

  const Node goal = root.at("goal");
  level.goal_region = read_polygon(goal.at("region"));
  for (const auto& o : goal.at("objects").items()) level.goal_object_ids.push_back(o.string());

  if (const auto prohibited = root.find("prohibited")) {
    for (const auto& p : prohibited->items()) level.prohibited.push_back(read_polygon(p));
  }

  const auto tools = root.at("tools").items();
  if (tools.size() != 3) {
    semantic_error("tool count must be exactly 3, got " + std::to_string(tools.size()));
  }
  for (std::size_t k = 0; k < 3; ++k) {
    const Node& t = tools[k];
    ToolShape tool;
    if (const auto name = t.find("name")) tool.name = name->string();
    const Shape raw = read_shape(t.at("shape"));
    if (!std::holds_alternative<physics::Compound>(raw)) {
      schema_error(t.path() + ".shape.type", "tools must be compound shapes");
    }
    try {
      physics::validate(raw);
    } catch (const physics::ShapeError& e) {
      schema_error(t.path() + ".shape", e.what());
    }
    tool.shape = physics::recenter(raw, physics::compute_mass(raw, 1.0).center);
    tool.material = read_material(t.find("material"), kDefaultToolMaterial);
    if (!(tool.material.density > 0)) schema_error(t.path() + ".material.density", "must be > 0");
    const Aabb box = physics::local_bounds(tool.shape);
    if (box.width() > kMaxToolExtent || box.height() > kMaxToolExtent) {
      semantic_error("tool " + std::to_string(k) + " does not fit in a 100x100 box");
    }
    level.tools[k] = std::move(tool);
  }

  // Semantic checks.
  if (level.goal_object_ids.empty()) semantic_error("goal.objects must not be empty");
  std::set<std::string> seen;
  for (const auto& id : level.goal_object_ids) {
    const auto* body = level.world.find(id);
    if (body == nullptr) semantic_error("goal object '" + id + "' is not a body");
    if (!body->is_dynamic()) semantic_error("goal object '" + id + "' must be dynamic");
    if (!seen.insert(id).second) semantic_error("goal object '" + id + "' listed twice");
  }
  const Aabb world_box = level.world.bounds;
  for (std::size_t i = 0; i < level.prohibited.size(); ++i) {
    const Aabb box = bounding_box(std::span<const Vec2>(level.prohibited[i].vertices));
    if (!world_box.contains(box)) {
      semantic_error("prohibited region " + std::to_string(i) + " extends outside the bounds");
    }
  }
  if (goal_distance(level, level.world) == 0.0) {
    semantic_error("degenerate level: goal object starts solved (inside the goal region)");
  }
  level.baseline = compute_baseline_distance(level);
  if (!(level.baseline > 0.0)) {
    semantic_error("degenerate level: goal is reached without any tool (baseline distance 0)");
  }
  return level;
}

LevelSpec load_level_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LevelError(LevelError::Kind::kSchema, "", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return load_level(ss.str());
  } catch (const LevelError& e) {
    throw LevelError(e.kind(), e.path(), e.message(), path.filename().string());
  }
}

std::vector<LevelSpec> load_level_dir(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<LevelSpec> levels;
  for (const auto& f : files) levels.push_back(load_level_file(f));
  return levels;
}

json level_to_json(const LevelSpec& level) {
  json bodies = json::array();
  for (const auto& b : level.world.bodies) {
    const auto pose = b.pose();
    bodies.push_back({
        {"id", b.id},
        {"kind", b.is_dynamic() ? "dynamic" : "static"},
        {"role", b.role == BodyRole::kGoalObject ? "goal-object" : "plain"},
        {"shape", shape_to_json(b.shape())},
        {"pose", {{"x", pose.position.x()}, {"y", pose.position.y()}, {"angle", pose.angle}}},
        {"material", material_json(b.material)},
    });
  }
  json prohibited = json::array();
  for (const auto& p : level.prohibited) prohibited.push_back(polygon_json(p));
  json tools = json::array();
  for (const auto& t : level.tools) {
    tools.push_back({{"name", t.name}, {"shape", shape_to_json(t.shape)}, {"material", material_json(t.material)}});
  }
  json out = {
      {"format", kLevelFormat},
      {"name", level.name},
      {"description", level.description},
      {"category", level.category},
      {"bounds", {{"min", vec_json(level.world.bounds.min)}, {"max", vec_json(level.world.bounds.max)}}},
      {"gravity", vec_json(level.world.gravity)},
      {"time_limit", level.time_limit},
      {"dwell", level.dwell},
      {"time_horizon", level.time_horizon},
      {"bodies", std::move(bodies)},
      {"goal", {{"region", polygon_json(level.goal_region)}, {"objects", level.goal_object_ids}}},
      {"prohibited", std::move(prohibited)},
      {"tools", std::move(tools)},
  };
  if (level.pair) {
    out["pair"] = {{"group", level.pair->group}, {"variant", level.pair->variant}, {"delta", level.pair->delta}};
  }
  return out;
}

}  // namespace vtools::levels

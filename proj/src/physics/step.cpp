#include "vtools/physics/step.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "collide.hpp"

namespace vtools::physics {
namespace {

constexpr int kSolveIterations = 8;
constexpr int kRelaxIterations = 3;
// Penetration tolerated before positional correction kicks in (world units).
constexpr double kLinearSlop = 0.5;
constexpr double kBaumgarte = 0.2;
constexpr double kMaxPushSpeed = 100.0;
// Approach speeds below this do not bounce.
constexpr double kRestitutionThreshold = 10.0;
constexpr double kSpeculativeDistance = 2.0;

struct ContactPoint {
  Vec2 anchor_a = Vec2::Zero();
  Vec2 anchor_b = Vec2::Zero();
  Vec2 point = Vec2::Zero();
  double base_separation = 0.0;
  double normal_mass = 0.0;
  double tangent_mass = 0.0;
  double normal_impulse = 0.0;
  double tangent_impulse = 0.0;
  double max_normal_impulse = 0.0;
  double relative_velocity = 0.0;
  std::uint64_t feature = 0;
};

struct Constraint {
  int a = 0;
  int b = 0;
  std::uint64_t pair = 0;
  Vec2 normal = Vec2::Zero();
  double friction = 0.0;
  double restitution = 0.0;
  std::array<ContactPoint, 2> points;
  int count = 0;
};

struct BodyVelocity {
  Vec2 v = Vec2::Zero();
  double w = 0.0;
  double inv_mass = 0.0;
  double inv_inertia = 0.0;
};

struct BodyDelta {
  Vec2 dp = Vec2::Zero();
  Mat2 dq = Mat2::Identity();
};

std::uint64_t pair_key(int a, int b) {
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

std::uint64_t feature_key(std::size_t part_a, std::size_t part_b, std::uint32_t feature) {
  return (static_cast<std::uint64_t>(part_a & 0xffff) << 48) |
         (static_cast<std::uint64_t>(part_b & 0xffff) << 32) | feature;
}

bool moving(const Body& b) { return b.is_dynamic() && b.active; }

void apply_impulse(BodyVelocity& a, BodyVelocity& b, const Vec2& ra, const Vec2& rb,
                   const Vec2& impulse) {
  a.v -= a.inv_mass * impulse;
  a.w -= a.inv_inertia * cross(ra, impulse);
  b.v += b.inv_mass * impulse;
  b.w += b.inv_inertia * cross(rb, impulse);
}

Vec2 relative_velocity(const BodyVelocity& a, const BodyVelocity& b, const Vec2& ra,
                       const Vec2& rb) {
  return b.v + cross(b.w, rb) - a.v - cross(a.w, ra);
}

}  // namespace

struct Stepper::Workspace {
  std::vector<std::vector<detail::WorldPart>> parts;
  std::vector<Aabb> boxes;
  std::vector<Constraint> constraints;
  std::vector<BodyVelocity> velocities;
  std::vector<BodyDelta> deltas;
  ContactCache next;
};

Stepper::Stepper() : ws_(std::make_unique<Workspace>()) {}
Stepper::~Stepper() = default;
Stepper::Stepper(Stepper&&) noexcept = default;
Stepper& Stepper::operator=(Stepper&&) noexcept = default;

void Stepper::advance(World& world, const NoiseConfig& noise, Rng& rng,
                      std::vector<CollisionEvent>* events) {
  Workspace& ws = *ws_;
  auto& bodies = world.bodies;
  const int n = static_cast<int>(bodies.size());
  const double dt = world.dt;
  const double inv_dt = 1.0 / dt;

  ws.parts.resize(n);
  ws.boxes.resize(n);
  ws.velocities.resize(n);
  ws.deltas.assign(n, BodyDelta{});
  for (int i = 0; i < n; ++i) {
    const Body& b = bodies[i];
    auto& vel = ws.velocities[i];
    vel.v = b.velocity;
    vel.w = b.angular_velocity;
    vel.inv_mass = moving(b) ? b.geometry->inv_mass : 0.0;
    vel.inv_inertia = moving(b) ? b.geometry->inv_inertia : 0.0;
    if (!b.active) continue;
    detail::transform_parts(b, ws.parts[i]);
    ws.boxes[i] = ws.parts[i].front().box;
    for (const auto& p : ws.parts[i]) {
      ws.boxes[i].min = ws.boxes[i].min.cwiseMin(p.box.min);
      ws.boxes[i].max = ws.boxes[i].max.cwiseMax(p.box.max);
    }
  }

  // Narrow phase and constraint preparation, in stable (i, j, part, part) order.
  const auto& cache = world.contacts.impulses;
  ws.constraints.clear();
  for (int i = 0; i < n; ++i) {
    const Body& a = bodies[i];
    if (!a.active) continue;
    for (int j = i + 1; j < n; ++j) {
      const Body& b = bodies[j];
      if (!b.active || (!moving(a) && !moving(b))) continue;
      const double margin =
          kSpeculativeDistance +
          dt * ((a.velocity - b.velocity).norm() +
                std::abs(a.angular_velocity) * a.geometry->bounding_radius +
                std::abs(b.angular_velocity) * b.geometry->bounding_radius);
      if (!ws.boxes[i].expanded(margin).overlaps(ws.boxes[j])) continue;
      const std::uint64_t pair = pair_key(i, j);
      const auto& va = ws.velocities[i];
      const auto& vb = ws.velocities[j];
      for (std::size_t pa = 0; pa < ws.parts[i].size(); ++pa) {
        const auto& part_a = ws.parts[i][pa];
        for (std::size_t pb = 0; pb < ws.parts[j].size(); ++pb) {
          const auto& part_b = ws.parts[j][pb];
          if (!part_a.box.expanded(margin).overlaps(part_b.box)) continue;
          const detail::Manifold m = detail::collide(part_a, part_b, margin);
          if (m.count == 0) continue;

          Constraint c;
          c.a = i;
          c.b = j;
          c.pair = pair;
          c.normal = m.normal;
          c.friction = std::sqrt(a.material.friction * b.material.friction);
          c.restitution = std::max(a.material.elasticity, b.material.elasticity);
          c.count = m.count;
          const Vec2 tangent = cross(c.normal, 1.0);
          for (int k = 0; k < m.count; ++k) {
            ContactPoint& p = c.points[k];
            p.point = m.points[k].point;
            p.anchor_a = p.point - a.position;
            p.anchor_b = p.point - b.position;
            p.base_separation = m.points[k].separation;
            const double rna = cross(p.anchor_a, c.normal);
            const double rnb = cross(p.anchor_b, c.normal);
            const double kn = va.inv_mass + vb.inv_mass + va.inv_inertia * rna * rna +
                              vb.inv_inertia * rnb * rnb;
            p.normal_mass = kn > 0 ? 1.0 / kn : 0.0;
            const double rta = cross(p.anchor_a, tangent);
            const double rtb = cross(p.anchor_b, tangent);
            const double kt = va.inv_mass + vb.inv_mass + va.inv_inertia * rta * rta +
                              vb.inv_inertia * rtb * rtb;
            p.tangent_mass = kt > 0 ? 1.0 / kt : 0.0;
            p.relative_velocity = c.normal.dot(relative_velocity(va, vb, p.anchor_a, p.anchor_b));
            p.feature = feature_key(pa, pb, m.points[k].feature);
            const CachedImpulse probe{pair, p.feature, 0.0, 0.0};
            const auto it = std::lower_bound(
                cache.begin(), cache.end(), probe, [](const CachedImpulse& x, const CachedImpulse& y) {
                  return std::tie(x.pair, x.feature) < std::tie(y.pair, y.feature);
                });
            if (it != cache.end() && it->pair == pair && it->feature == p.feature) {
              p.normal_impulse = it->normal;
              p.tangent_impulse = it->tangent;
            }
          }
          ws.constraints.push_back(c);
        }
      }
    }
  }

  // Gravity.
  for (int i = 0; i < n; ++i) {
    if (moving(bodies[i])) ws.velocities[i].v += dt * world.gravity;
  }

  // Warm start.
  for (auto& c : ws.constraints) {
    auto& va = ws.velocities[c.a];
    auto& vb = ws.velocities[c.b];
    const Vec2 tangent = cross(c.normal, 1.0);
    for (int k = 0; k < c.count; ++k) {
      const ContactPoint& p = c.points[k];
      apply_impulse(va, vb, p.anchor_a, p.anchor_b,
                    p.normal_impulse * c.normal + p.tangent_impulse * tangent);
    }
  }

  const auto solve = [&](bool use_bias, bool positions_moved) {
    for (auto& c : ws.constraints) {
      auto& va = ws.velocities[c.a];
      auto& vb = ws.velocities[c.b];
      const auto& da = ws.deltas[c.a];
      const auto& db = ws.deltas[c.b];
      const Vec2& normal = c.normal;
      for (int k = 0; k < c.count; ++k) {
        ContactPoint& p = c.points[k];
        double s = p.base_separation;
        if (positions_moved) {
          const Vec2 moved_a = da.dp + da.dq * p.anchor_a - p.anchor_a;
          const Vec2 moved_b = db.dp + db.dq * p.anchor_b - p.anchor_b;
          s += normal.dot(moved_b - moved_a);
        }
        double bias = 0.0;
        if (s > 0) {
          bias = s * inv_dt;
        } else if (use_bias) {
          bias = std::max(kBaumgarte * inv_dt * std::min(0.0, s + kLinearSlop), -kMaxPushSpeed);
        }
        const double vn = normal.dot(relative_velocity(va, vb, p.anchor_a, p.anchor_b));
        const double lambda = -p.normal_mass * (vn + bias);
        const double total = std::max(p.normal_impulse + lambda, 0.0);
        const double applied = total - p.normal_impulse;
        p.normal_impulse = total;
        p.max_normal_impulse = std::max(p.max_normal_impulse, total);
        apply_impulse(va, vb, p.anchor_a, p.anchor_b, applied * normal);
      }
      const Vec2 tangent = cross(normal, 1.0);
      for (int k = 0; k < c.count; ++k) {
        ContactPoint& p = c.points[k];
        const double vt = tangent.dot(relative_velocity(va, vb, p.anchor_a, p.anchor_b));
        const double limit = c.friction * p.normal_impulse;
        const double total = std::clamp(p.tangent_impulse - p.tangent_mass * vt, -limit, limit);
        const double applied = total - p.tangent_impulse;
        p.tangent_impulse = total;
        apply_impulse(va, vb, p.anchor_a, p.anchor_b, applied * tangent);
      }
    }
  };

  for (int it = 0; it < kSolveIterations; ++it) solve(true, false);

  for (int i = 0; i < n; ++i) {
    Body& b = bodies[i];
    if (!moving(b)) continue;
    const auto& vel = ws.velocities[i];
    auto& d = ws.deltas[i];
    d.dp = dt * vel.v;
    d.dq = rotation(dt * vel.w);
    b.position += d.dp;
    b.angle += dt * vel.w;
  }

  for (int it = 0; it < kRelaxIterations; ++it) solve(false, true);

  // Restitution against the approach speed measured before this step.
  for (auto& c : ws.constraints) {
    if (c.restitution == 0.0) continue;
    auto& va = ws.velocities[c.a];
    auto& vb = ws.velocities[c.b];
    for (int k = 0; k < c.count; ++k) {
      ContactPoint& p = c.points[k];
      if (p.relative_velocity > -kRestitutionThreshold || p.max_normal_impulse == 0.0) continue;
      const double vn = c.normal.dot(relative_velocity(va, vb, p.anchor_a, p.anchor_b));
      const double lambda = -p.normal_mass * (vn + c.restitution * p.relative_velocity);
      const double total = std::max(p.normal_impulse + lambda, 0.0);
      const double applied = total - p.normal_impulse;
      p.normal_impulse = total;
      p.max_normal_impulse = std::max(p.max_normal_impulse, total);
      apply_impulse(va, vb, p.anchor_a, p.anchor_b, applied * c.normal);
    }
  }

  // Pairs that start exchanging impulse this step are collisions; their net
  // impulse is where the perturbation goes.
  ws.next.impulses.clear();
  ws.next.touching.clear();
  const auto& was_touching = world.contacts.touching;
  const double time_after = static_cast<double>(world.step_count + 1) * dt;
  for (std::size_t first = 0; first < ws.constraints.size();) {
    std::size_t last = first;
    while (last < ws.constraints.size() && ws.constraints[last].pair == ws.constraints[first].pair) {
      ++last;
    }
    Vec2 impulse = Vec2::Zero();
    Vec2 weighted_point = Vec2::Zero();
    double weight = 0.0;
    bool touching = false;
    for (std::size_t q = first; q < last; ++q) {
      const Constraint& c = ws.constraints[q];
      const Vec2 tangent = cross(c.normal, 1.0);
      for (int k = 0; k < c.count; ++k) {
        const ContactPoint& p = c.points[k];
        touching = touching || p.max_normal_impulse > 0.0;
        impulse += p.normal_impulse * c.normal + p.tangent_impulse * tangent;
        weighted_point += p.normal_impulse * p.point;
        weight += p.normal_impulse;
        ws.next.impulses.push_back({c.pair, p.feature, p.normal_impulse, p.tangent_impulse});
      }
    }
    const Constraint& head = ws.constraints[first];
    if (touching) {
      ws.next.touching.push_back(head.pair);
      const bool began = !std::binary_search(was_touching.begin(), was_touching.end(), head.pair);
      if (began) {
        if (events != nullptr) {
          events->push_back({time_after, bodies[head.a].id, bodies[head.b].id});
        }
        if (noise.enabled() && weight > 0.0) {
          const double angle = vtools::normal(rng, 0.0, noise.impulse_direction_sd);
          const double scale = std::max(0.0, 1.0 + vtools::normal(rng, 0.0, noise.impulse_magnitude_sd));
          const Vec2 perturbed = scale * (rotation(angle) * impulse);
          const Vec2 at = weighted_point / weight;
          apply_impulse(ws.velocities[head.a], ws.velocities[head.b], at - bodies[head.a].position,
                        at - bodies[head.b].position, perturbed - impulse);
        }
      }
    }
    first = last;
  }
  std::sort(ws.next.impulses.begin(), ws.next.impulses.end(),
            [](const CachedImpulse& x, const CachedImpulse& y) {
              return std::tie(x.pair, x.feature) < std::tie(y.pair, y.feature);
            });
  std::swap(world.contacts, ws.next);

  for (int i = 0; i < n; ++i) {
    Body& b = bodies[i];
    if (!moving(b)) continue;
    b.velocity = ws.velocities[i].v;
    b.angular_velocity = ws.velocities[i].w;
    if (!b.position.allFinite() || !b.velocity.allFinite() || !std::isfinite(b.angle) ||
        !std::isfinite(b.angular_velocity)) {
      throw SimulationDiverged(b.id, world.step_count + 1);
    }
    const Aabb box = b.world_bounds();
    if (box.max.y() < world.bounds.min.y() || box.max.x() < world.bounds.min.x() ||
        box.min.x() > world.bounds.max.x()) {
      b.active = false;
      b.velocity.setZero();
      b.angular_velocity = 0.0;
    }
  }
  ++world.step_count;
}

World step(const World& world, const NoiseConfig& noise, Rng& rng) {
  World next = world;
  Stepper stepper;
  stepper.advance(next, noise, rng);
  return next;
}

Frame capture_frame(const World& world) {
  Frame f;
  f.time = world.time();
  for (const auto& b : world.bodies) {
    if (b.is_dynamic()) f.poses.push_back(b.pose());
  }
  return f;
}

Trajectory simulate(const World& world, double duration, const NoiseConfig& noise,
                    std::uint64_t seed, const SimulateOptions& options) {
  check_invariants(world);
  if (!(duration >= 0)) throw std::invalid_argument("simulate: duration must be >= 0");
  if (options.frame_stride < 1) throw std::invalid_argument("simulate: frame_stride must be >= 1");

  Trajectory traj;
  traj.dt = world.dt;
  traj.frame_stride = options.frame_stride;
  for (const auto& b : world.bodies) {
    if (b.is_dynamic()) traj.body_ids.push_back(b.id);
  }

  World w = world;
  traj.frames.push_back(capture_frame(w));
  if (options.observer && !options.observer(w)) {
    traj.terminal_world = std::move(w);
    return traj;
  }

  Rng rng(seed);
  Stepper stepper;
  const auto steps = static_cast<std::int64_t>(std::ceil(duration / world.dt - 1e-9));
  const auto settle_steps =
      static_cast<std::int64_t>(std::ceil(options.settle.window / world.dt - 1e-9));
  std::int64_t calm = 0;
  auto* events = options.record_collisions ? &traj.collisions : nullptr;
  for (std::int64_t s = 1; s <= steps; ++s) {
    stepper.advance(w, noise, rng, events);
    if (options.record_frames && s % options.frame_stride == 0) {
      traj.frames.push_back(capture_frame(w));
    }
    if (options.observer && !options.observer(w)) break;
    if (options.stop_when_settled) {
      bool still = true;
      for (const auto& b : w.bodies) {
        if (b.is_dynamic() && b.active &&
            (b.velocity.norm() >= options.settle.linear_speed ||
             std::abs(b.angular_velocity) >= options.settle.angular_speed)) {
          still = false;
          break;
        }
      }
      calm = still ? calm + 1 : 0;
      if (calm >= settle_steps) break;
    }
  }
  traj.terminal_world = std::move(w);
  return traj;
}

double total_energy(const World& world) {
  double e = 0.0;
  for (const auto& b : world.bodies) {
    if (!b.is_dynamic()) continue;
    const auto& m = b.geometry->mass;
    e += 0.5 * m.mass * b.velocity.squaredNorm() + 0.5 * m.inertia * b.angular_velocity * b.angular_velocity -
         m.mass * world.gravity.dot(b.position);
  }
  return e;
}

}  // namespace vtools::physics

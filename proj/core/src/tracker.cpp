#include "scenefit/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace scenefit {

double unary_cost(const DetectionSequence& seq, int t, int skeleton) {
  if (skeleton == kDummySkeleton) return -1.0;
  return -seq.frames[t].skeletons[skeleton].mean_confidence();
}

double binary_cost(const DetectionSequence& seq, int t, int skeleton0, int skeleton1) {
  if (skeleton0 == kDummySkeleton || skeleton1 == kDummySkeleton) return 1.0;
  const DetectedSkeleton& a = seq.frames[t].skeletons[skeleton0];
  const DetectedSkeleton& b = seq.frames[t + 1].skeletons[skeleton1];
  const double inv_diag = 1.0 / seq.image_half_diagonal;
  double acc = 0.0;
  for (int k = 0; k < kJointCount; ++k) {
    const Vec2 d = (a.joints[k].pixel - b.joints[k].pixel) * inv_diag;
    acc += d.squaredNorm() * a.joints[k].confidence * b.joints[k].confidence;
  }
  return acc / kJointCount;
}

namespace {

// All feasible per-frame assignments: injective maps actor -> skeleton that
// cover every real skeleton; unmatched actors take the dummy. Generated in
// lexicographic order over (actor0, actor1, ...) choices so DP ties break
// deterministically.
std::vector<std::vector<int>> enumerate_states(int n_actors, int n_skeletons) {
  std::vector<std::vector<int>> states;
  std::vector<int> current(n_actors, kDummySkeleton);
  std::vector<bool> used(n_skeletons, false);

  const auto count_unused = [&] {
    int c = 0;
    for (bool u : used) c += u ? 0 : 1;
    return c;
  };

  const std::function<void(int)> rec = [&](int actor) {
    if (actor == n_actors) {
      if (count_unused() == 0) states.push_back(current);
      return;
    }
    // Remaining actors must still be able to cover the unused skeletons.
    if (count_unused() > n_actors - actor) return;
    current[actor] = kDummySkeleton;
    rec(actor + 1);
    for (int s = 0; s < n_skeletons; ++s) {
      if (used[s]) continue;
      used[s] = true;
      current[actor] = s;
      rec(actor + 1);
      used[s] = false;
    }
    current[actor] = kDummySkeleton;
  };
  rec(0);
  return states;
}

bool satisfies(const std::vector<int>& state, int frame,
               const std::vector<TrackingConstraint>& constraints) {
  for (const TrackingConstraint& c : constraints) {
    if (c.frame == frame && state[c.actor] != c.skeleton) return false;
  }
  return true;
}

}  // namespace

std::variant<ActorAssignment, TrackingError> solve_tracking(
    const DetectionSequence& seq, int n_actors,
    const std::vector<TrackingConstraint>& constraints, const TrackingParams& params) {
  const int n = static_cast<int>(seq.frames.size());
  if (n == 0) return ActorAssignment{};

  for (int t = 0; t < n; ++t) {
    if (static_cast<int>(seq.frames[t].skeletons.size()) > n_actors) {
      return TrackingError{"more skeleton detections than actors at frame " + std::to_string(t),
                           t};
    }
  }

  std::vector<std::vector<std::vector<int>>> states(n);
  for (int t = 0; t < n; ++t) {
    auto all = enumerate_states(n_actors, static_cast<int>(seq.frames[t].skeletons.size()));
    for (auto& s : all) {
      if (satisfies(s, t, constraints)) states[t].push_back(std::move(s));
    }
    if (states[t].empty()) {
      return TrackingError{"constraints leave no feasible assignment at frame " +
                               std::to_string(t),
                           t};
    }
  }

  const auto state_unary = [&](int t, const std::vector<int>& state) {
    double acc = 0.0;
    for (int a = 0; a < n_actors; ++a) acc += unary_cost(seq, t, state[a]);
    return acc;
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> cost(n);
  std::vector<std::vector<int>> back(n);
  cost[0].resize(states[0].size());
  back[0].assign(states[0].size(), -1);
  for (size_t i = 0; i < states[0].size(); ++i) cost[0][i] = state_unary(0, states[0][i]);

  for (int t = 1; t < n; ++t) {
    cost[t].assign(states[t].size(), kInf);
    back[t].assign(states[t].size(), -1);
    for (size_t j = 0; j < states[t].size(); ++j) {
      const double u = state_unary(t, states[t][j]);
      for (size_t i = 0; i < states[t - 1].size(); ++i) {
        double transition = 0.0;
        for (int a = 0; a < n_actors; ++a) {
          transition += binary_cost(seq, t - 1, states[t - 1][i][a], states[t][j][a]);
        }
        const double total = cost[t - 1][i] + params.pairwise_weight * transition + u;
        if (total < cost[t][j]) {
          cost[t][j] = total;
          back[t][j] = static_cast<int>(i);
        }
      }
    }
  }

  size_t best = 0;
  for (size_t i = 1; i < states[n - 1].size(); ++i) {
    if (cost[n - 1][i] < cost[n - 1][best]) best = i;
  }

  ActorAssignment out;
  out.objective = cost[n - 1][best];
  out.assignment.resize(n);
  int cur = static_cast<int>(best);
  for (int t = n - 1; t >= 0; --t) {
    out.assignment[t] = states[t][cur];
    cur = back[t][cur];
  }
  return out;
}

double tracking_objective(const DetectionSequence& seq, const ActorAssignment& labeling,
                          const TrackingParams& params) {
  const int n = static_cast<int>(labeling.assignment.size());
  const int n_actors = n > 0 ? static_cast<int>(labeling.assignment[0].size()) : 0;
  double acc = 0.0;
  for (int t = 0; t < n; ++t) {
    for (int a = 0; a < n_actors; ++a) acc += unary_cost(seq, t, labeling.assignment[t][a]);
  }
  for (int t = 0; t + 1 < n; ++t) {
    for (int a = 0; a < n_actors; ++a) {
      acc += params.pairwise_weight *
             binary_cost(seq, t, labeling.assignment[t][a], labeling.assignment[t + 1][a]);
    }
  }
  return acc;
}

std::vector<ObservationTrack> tracks_from_assignment(const DetectionSequence& seq,
                                                     const ActorAssignment& assignment) {
  const int n = static_cast<int>(assignment.assignment.size());
  const int n_actors = n > 0 ? static_cast<int>(assignment.assignment[0].size()) : 0;
  std::vector<ObservationTrack> tracks(n_actors);
  for (int a = 0; a < n_actors; ++a) {
    tracks[a].fps = seq.fps;
    tracks[a].frames.resize(n);
    for (int t = 0; t < n; ++t) {
      const int s = assignment.assignment[t][a];
      if (s == kDummySkeleton) {
        tracks[a].frames[t].valid = false;
        continue;
      }
      tracks[a].frames[t].joints = seq.frames[t].skeletons[s].joints;
    }
  }
  return tracks;
}

}  // namespace scenefit

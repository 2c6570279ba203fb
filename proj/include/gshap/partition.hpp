#pragma once

#include <algorithm>
#include <cstddef>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gshap/coalition.hpp"
#include "gshap/errors.hpp"

namespace gshap {

struct FeatureGroup {
  std::string label;
  std::vector<int> features;  // sorted ascending
};

/// A validated partition of features 0..M-1 into disjoint, non-empty groups.
/// Group order is kept as given but carries no meaning; results are keyed by
/// label.
class FeaturePartition {
 public:
  int feature_count() const { return feature_count_; }
  int group_count() const { return static_cast<int>(groups_.size()); }
  const std::vector<FeatureGroup>& groups() const { return groups_; }
  const FeatureGroup& group(int i) const {
    return groups_[static_cast<std::size_t>(i)];
  }
  Coalition group_mask(int i) const {
    return masks_[static_cast<std::size_t>(i)];
  }
  int group_of(int feature) const {
    return owner_[static_cast<std::size_t>(feature)];
  }

  std::vector<std::string> labels() const {
    std::vector<std::string> out;
    out.reserve(groups_.size());
    for (const auto& g : groups_) out.push_back(g.label);
    return out;
  }

  int index_of(const std::string& label) const {
    for (std::size_t i = 0; i < groups_.size(); ++i) {
      if (groups_[i].label == label) return static_cast<int>(i);
    }
    throw ValidationError("unknown group label '" + label + "'");
  }

  /// Feature coalition covering every group in a group coalition.
  Coalition expand(Coalition group_coalition) const {
    Coalition out;
    for (std::uint64_t m = group_coalition.members; m != 0; m &= m - 1) {
      out = out | masks_[static_cast<std::size_t>(std::countr_zero(m))];
    }
    return out;
  }

  /// Same partition with groups listed in a different order.
  FeaturePartition reordered(const std::vector<int>& order) const;

  friend FeaturePartition validate_partition(std::vector<FeatureGroup> groups,
                                             int feature_count);

 private:
  int feature_count_ = 0;
  std::vector<FeatureGroup> groups_;
  std::vector<Coalition> masks_;
  std::vector<int> owner_;
};

inline FeaturePartition validate_partition(std::vector<FeatureGroup> groups,
                                           int feature_count) {
  if (feature_count < 1 || feature_count > kMaxPlayers) {
    throw ValidationError("feature count must lie in 1..63, got " +
                          std::to_string(feature_count));
  }
  if (groups.empty()) throw ValidationError("partition has no groups");

  FeaturePartition p;
  p.feature_count_ = feature_count;
  p.owner_.assign(static_cast<std::size_t>(feature_count), -1);
  std::set<std::string> seen_labels;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    auto& g = groups[gi];
    if (g.label.empty()) {
      throw ValidationError("group " + std::to_string(gi) + " has an empty label");
    }
    if (!seen_labels.insert(g.label).second) {
      throw ValidationError("duplicate group label '" + g.label + "'");
    }
    if (g.features.empty()) {
      throw ValidationError("group '" + g.label + "' is empty");
    }
    std::sort(g.features.begin(), g.features.end());
    Coalition mask;
    for (int f : g.features) {
      if (f < 0 || f >= feature_count) {
        throw ValidationError("group '" + g.label + "' references feature " +
                              std::to_string(f) + " outside 0.." +
                              std::to_string(feature_count - 1));
      }
      int& owner = p.owner_[static_cast<std::size_t>(f)];
      if (owner >= 0) {
        throw ValidationError(
            "feature " + std::to_string(f) + " appears in more than one group ('" +
            groups[static_cast<std::size_t>(owner)].label + "' and '" + g.label + "')");
      }
      owner = static_cast<int>(gi);
      mask = mask.with(f);
    }
    p.masks_.push_back(mask);
  }
  for (int f = 0; f < feature_count; ++f) {
    if (p.owner_[static_cast<std::size_t>(f)] < 0) {
      throw ValidationError("feature " + std::to_string(f) +
                            " is not assigned to any group");
    }
  }
  p.groups_ = std::move(groups);
  return p;
}

/// Unlabelled overload; groups are named G1, G2, ... in the given order.
inline FeaturePartition validate_partition(
    const std::vector<std::vector<int>>& groups, int feature_count) {
  std::vector<FeatureGroup> labelled;
  labelled.reserve(groups.size());
  for (std::size_t i = 0; i < groups.size(); ++i) {
    labelled.push_back({"G" + std::to_string(i + 1), groups[i]});
  }
  return validate_partition(std::move(labelled), feature_count);
}

inline FeaturePartition FeaturePartition::reordered(
    const std::vector<int>& order) const {
  if (order.size() != groups_.size()) {
    throw ValidationError("reorder permutation has the wrong length");
  }
  std::vector<FeatureGroup> out;
  out.reserve(order.size());
  for (int i : order) out.push_back(groups_.at(static_cast<std::size_t>(i)));
  return validate_partition(std::move(out), feature_count_);
}

/// Singleton groups {0},{1},...; labels are the feature indices.
inline FeaturePartition singleton_partition(int feature_count) {
  std::vector<FeatureGroup> groups;
  for (int f = 0; f < feature_count; ++f) {
    groups.push_back({"x" + std::to_string(f), {f}});
  }
  return validate_partition(std::move(groups), feature_count);
}

/// {"M": int, "groups": {"<label>": [indices...], ...}}; label order is kept.
inline FeaturePartition partition_from_json(const nlohmann::ordered_json& doc) {
  if (!doc.is_object() || !doc.contains("M") || !doc.contains("groups")) {
    throw ValidationError("partition spec needs keys \"M\" and \"groups\"");
  }
  if (!doc["M"].is_number_integer()) {
    throw ValidationError("partition spec \"M\" must be an integer");
  }
  const auto& gs = doc["groups"];
  if (!gs.is_object()) {
    throw ValidationError("partition spec \"groups\" must be an object");
  }
  std::vector<FeatureGroup> groups;
  for (const auto& [label, idx] : gs.items()) {
    if (!idx.is_array()) {
      throw ValidationError("group '" + label + "' must be an index array");
    }
    FeatureGroup g{label, {}};
    for (const auto& v : idx) {
      if (!v.is_number_integer()) {
        throw ValidationError("group '" + label + "' has a non-integer index");
      }
      g.features.push_back(v.get<int>());
    }
    groups.push_back(std::move(g));
  }
  return validate_partition(std::move(groups), doc["M"].get<int>());
}

inline nlohmann::ordered_json partition_to_json(const FeaturePartition& p) {
  nlohmann::ordered_json doc;
  doc["M"] = p.feature_count();
  doc["groups"] = nlohmann::ordered_json::object();
  for (const auto& g : p.groups()) doc["groups"][g.label] = g.features;
  return doc;
}

}  // namespace gshap

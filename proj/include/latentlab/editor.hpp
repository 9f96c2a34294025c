#pragma once

// Incremental latent editing: alternate between searching the instance-aware
// (conditional) direction at the current point and stepping z <- z + k d.

#include <string>
#include <vector>

#include "latentlab/directions.hpp"
#include "latentlab/error.hpp"
#include "latentlab/synthworld.hpp"

namespace latentlab {

struct EditConfig {
  std::string primal;
  std::vector<std::string> conditions;
  int target = 1;
  ControlFactors factors;
  double step_size = 0.1;
  std::size_t steps = 20;
  // false: the direction found at z0 is reused for every step.
  bool incremental = true;

  // Throws InvalidArgument / UnknownAttribute.
  void validate(const World& world) const;
};

struct TrajectoryPoint {
  std::size_t step = 0;
  Vec z;
  Vec x;                             // G(z); empty when not recorded
  std::vector<double> edit_scores;   // per attribute; empty when not recorded
};

struct EditTrajectory {
  EditConfig config;
  std::vector<TrajectoryPoint> points;  // points[0] is the unedited input
};

struct EditOptions {
  bool record_observations = true;
  bool record_scores = true;
};

// Thrown when a direction degenerates mid-edit; carries the completed prefix.
class EditAborted : public Error {
 public:
  EditAborted(EditTrajectory partial, ErrorKind cause, const std::string& message)
      : Error(ErrorKind::EditAborted, message), partial_(std::move(partial)), cause_(cause) {}

  const EditTrajectory& partial() const noexcept { return partial_; }
  ErrorKind cause() const noexcept { return cause_; }
  // Index of the first step that could not be produced.
  std::size_t failed_step() const noexcept { return partial_.points.size(); }

 private:
  EditTrajectory partial_;
  ErrorKind cause_;
};

// Condition preservation targets are the edit-classifier labels at z0.
EditTrajectory edit(const World& world, const AttributeLevelSet& attr_level, const Vec& z0,
                    const EditConfig& config, const EditOptions& options = {});

}  // namespace latentlab

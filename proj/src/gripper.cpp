#include "graspkit/gripper.hpp"

#include "graspkit/common.hpp"

namespace gk {

void GripperSpec::validate() const {
  if (!(max_opening > 0)) throw ValidationError("gripper: max_opening must be > 0");
  if (!(pregrasp_offset > 0)) throw ValidationError("gripper: pregrasp_offset must be > 0");
  if (!(finger_length > 0) || !(pad_width > 0) || !(pad_height > 0) ||
      !(finger_thickness > 0)) {
    throw ValidationError("gripper: finger dimensions must be positive");
  }
  if (pad_height > finger_length) {
    throw ValidationError("gripper: pad taller than the finger");
  }
  for (const ConvexPiece& p : body) validate_convex_piece(p);
}

std::vector<ConvexPiece> GripperSpec::collision_shapes(double opening) const {
  std::vector<ConvexPiece> shapes = body;
  double half_gap = 0.5 * std::min(opening, max_opening);
  Vec3 finger_half(0.5 * finger_thickness, 0.5 * pad_width, 0.5 * finger_length);
  for (int side = -1; side <= 1; side += 2) {
    shapes.push_back(ConvexPiece::box(
        finger_half, Pose::from_translation(Vec3(
                         side * (half_gap + 0.5 * finger_thickness), 0, 0.5 * finger_length))));
  }
  return shapes;
}

GripperSpec default_gripper() {
  GripperSpec g;
  g.name = "robotiq_2f85";
  // palm body behind the palm face (z <= 0)
  g.body = {ConvexPiece::box(Vec3(0.045, 0.035, 0.045),
                             Pose::from_translation(Vec3(0, 0, -0.045)))};
  return g;
}

}  // namespace gk

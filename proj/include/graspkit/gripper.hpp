#pragma once

#include <string>
#include <vector>

#include "graspkit/convex.hpp"

namespace gk {

// Parallel-jaw gripper description. Conventions: the approach axis is local
// +z (palm face at z = 0, fingers extending to z = finger_length), the
// closing axis is local x. Fingertip pads are rectangles on the inner finger
// faces, pad_width across y and pad_height along z, ending at the fingertip.
struct GripperSpec {
  std::string name = "parallel-jaw";
  double max_opening = 0.085;     // m
  double finger_length = 0.048;   // m
  double pad_width = 0.022;       // m (y extent)
  double pad_height = 0.024;      // m (z extent)
  double finger_thickness = 0.012;  // m (x extent of each finger)
  double pregrasp_offset = 0.04;  // m back along local z
  std::vector<ConvexPiece> body;  // palm shapes behind the palm face

  void validate() const;

  // Distance from the palm face to the pad center along +z.
  double pad_center_depth() const { return finger_length - 0.5 * pad_height; }

  // Collision shapes (body + two fingers) for a given jaw opening.
  std::vector<ConvexPiece> collision_shapes(double opening) const;
};

// The Robotiq-class default: 85 mm stroke, 48 mm fingers, 4 cm pre-grasp
// offset, and a box palm body.
GripperSpec default_gripper();

}  // namespace gk

#pragma once

namespace fmmlab {

// A stable, named comparison/conversion location in the solver. Site ids
// are fixed strings (not addresses) so reports are comparable across runs
// and builds.
struct Site {
  const char* id;
  const char* where;  // source location, for reports
};

namespace sites {

inline constexpr Site fmm_heap_less{"fmm.heap_less", "fmm.hpp:NarrowBandQueue"};
inline constexpr Site fmm_upwind{"fmm.upwind_accept", "fmm.hpp:quadrant_update"};
inline constexpr Site fmm_discriminant{"fmm.discriminant", "fmm.hpp:quadrant_update"};
inline constexpr Site fmm_quadrant_min{"fmm.quadrant_min", "fmm.hpp:update_node"};
inline constexpr Site fmm_improve{"fmm.improve", "fmm.hpp:update_node"};
inline constexpr Site grid_index_x{"grid.cell_index_x", "interp.hpp:cell_index"};
inline constexpr Site grid_index_y{"grid.cell_index_y", "interp.hpp:cell_index"};
inline constexpr Site bt_phi_less{"backtrace.phi_less", "backtrace.hpp:steepest_point"};
inline constexpr Site bt_descent{"backtrace.descent", "backtrace.hpp:steepest_point"};
inline constexpr Site bt_t_decrease{"backtrace.t_decrease", "backtrace.hpp:extract_path"};
inline constexpr Site bt_stop_radius{"backtrace.stop_radius", "backtrace.hpp:extract_path"};
inline constexpr Site bt_classify{"backtrace.point_classify", "backtrace.hpp:candidate_segments"};

}  // namespace sites

}  // namespace fmmlab

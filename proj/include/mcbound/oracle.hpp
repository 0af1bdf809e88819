#pragma once

#include "mcbound/field.hpp"
#include "mcbound/net.hpp"
#include "mcbound/types.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace mcbound {

/// Dense labelling at cell centers. labels[j * nx + i] is cell column i, row j, with
/// row 0 at y_lo.
struct ClassGrid {
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::size_t class_count = 0;
    Rect bounds;
    std::vector<std::uint32_t> labels;

    double cell_width() const { return bounds.width() / static_cast<double>(nx); }
    double cell_height() const { return bounds.height() / static_cast<double>(ny); }
    Point2 cell_center(std::size_t i, std::size_t j) const;
    std::uint32_t at(std::size_t i, std::size_t j) const { return labels[j * nx + i]; }
};

ClassGrid rasterize(const MultiClassField& field, const Rect& bounds, std::size_t nx, std::size_t ny);

/// Header "nx ny k", then one line of labels per row starting at y_lo.
std::string grid_to_text(const ClassGrid& grid);

/// Direction in which rays leave each cell center towards the border.
enum class RayDirection { NegX, PosX, NegY, PosY };

inline constexpr std::uint32_t kUnknownLabel = std::numeric_limits<std::uint32_t>::max();

/// Labels induced by the network: one anchor label taken from the grid at the border
/// point farthest from every segment, propagated around the border and then along
/// axis-aligned rays by flipping across each crossed segment's class pair.
/// Throws NotWatertight if the network fails check_watertight or its border labels do not close.
std::vector<std::uint32_t> network_labels(const EdgeNetwork& net, const ClassGrid& grid,
                                          RayDirection dir = RayDirection::NegX);

/// Cells within `exclusion` of a segment: true in the returned mask.
std::vector<bool> exclusion_mask(const EdgeNetwork& net, const ClassGrid& grid, double exclusion);

struct AgreementResult {
    double fraction = 0.0;
    std::size_t compared = 0;
    std::size_t agreeing = 0;
    std::size_t excluded = 0;
};

AgreementResult region_agreement(const EdgeNetwork& net, const ClassGrid& grid, double exclusion,
                                 RayDirection dir = RayDirection::NegX);

/// Max of (boundary samples to nearest segment) and (segment midpoints and ends to the
/// boundary). Infinity when the network is empty but samples exist.
double boundary_hausdorff(const EdgeNetwork& net, const std::vector<Point2>& boundary_samples,
                          const std::function<double(Point2)>& boundary_distance);
double boundary_hausdorff(const EdgeNetwork& net, const ReferenceBoundary& boundary, std::size_t n_samples);

} // namespace mcbound

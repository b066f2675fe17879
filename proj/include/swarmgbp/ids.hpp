#pragma once

// Global 64-bit ids for variables and factors: [tag:4][robot:20][other:20][serial:20].
// Every robot can name a neighbour's variables and shared factors without
// coordination.

#include <cstdint>

namespace swarmgbp {

using RobotId = std::uint32_t;

namespace ids {

enum class Tag : std::uint64_t {
    ConsensusVar = 1,
    PlanVar,
    Prior,
    Temporal,
    MarginalPrior,
    AnchorCurrent,
    AnchorHorizon,
    Dynamics,
    Unicycle,
    ConsensusLink,
    CollisionLink,
};

inline constexpr std::uint64_t kFieldMask = (1ull << 20) - 1;

constexpr std::uint64_t make(Tag tag, RobotId robot, RobotId other, std::uint64_t serial)
{
    return (static_cast<std::uint64_t>(tag) << 60) | ((robot & kFieldMask) << 40) | ((other & kFieldMask) << 20) |
           (serial & kFieldMask);
}

constexpr Tag tag_of(std::uint64_t id) { return static_cast<Tag>(id >> 60); }
constexpr RobotId robot_of(std::uint64_t id) { return static_cast<RobotId>((id >> 40) & kFieldMask); }
constexpr RobotId other_of(std::uint64_t id) { return static_cast<RobotId>((id >> 20) & kFieldMask); }
constexpr std::uint32_t serial_of(std::uint64_t id) { return static_cast<std::uint32_t>(id & kFieldMask); }

} // namespace ids
} // namespace swarmgbp

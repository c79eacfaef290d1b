#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace elastoform {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised for any per-node failure; carries the offending node.
struct NodeError : std::runtime_error {
    NodeError(const std::string& what, std::size_t node)
        : std::runtime_error(what + " at node " + std::to_string(node)), node(node) {}
    std::size_t node;
};

struct GeometryError : NodeError {
    using NodeError::NodeError;
};

struct OrientationError : NodeError {
    using NodeError::NodeError;
};

struct RepresentationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InstabilityError : std::runtime_error {
    InstabilityError(const std::string& what, long step)
        : std::runtime_error(what + " at step " + std::to_string(step)), step(step) {}
    long step;
};

}  // namespace elastoform

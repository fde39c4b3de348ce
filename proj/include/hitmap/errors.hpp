#pragma once

#include <stdexcept>
#include <string>

namespace hitmap {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define HITMAP_DECLARE_ERROR(Name)                                   \
    class Name : public Error {                                      \
    public:                                                          \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
    }

HITMAP_DECLARE_ERROR(ParseError);
HITMAP_DECLARE_ERROR(BoundaryError);
HITMAP_DECLARE_ERROR(PoseInObstacle);
HITMAP_DECLARE_ERROR(FrameMismatch);
HITMAP_DECLARE_ERROR(RobotCellNotTraversable);
HITMAP_DECLARE_ERROR(UnknownSubmapId);
HITMAP_DECLARE_ERROR(NonConsecutiveIds);
HITMAP_DECLARE_ERROR(ValidationNotPerformed);
HITMAP_DECLARE_ERROR(NoSuchLoopEdge);
HITMAP_DECLARE_ERROR(NoPath);
HITMAP_DECLARE_ERROR(NoFrontiers);
HITMAP_DECLARE_ERROR(ConfigError);
HITMAP_DECLARE_ERROR(IoError);

#undef HITMAP_DECLARE_ERROR

}  // namespace hitmap

#pragma once

#include <stdexcept>
#include <string>

namespace mariscope {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define MARISCOPE_ERROR_TYPE(NAME)                  \
    class NAME : public Error {                     \
    public:                                         \
        using Error::Error;                         \
    }

// imgcore
MARISCOPE_ERROR_TYPE(ChannelMismatch);
MARISCOPE_ERROR_TYPE(InvalidThresholds);
MARISCOPE_ERROR_TYPE(EmptyRegion);

// horizon
MARISCOPE_ERROR_TYPE(NoEdgePixels);
MARISCOPE_ERROR_TYPE(VerticalLine);
MARISCOPE_ERROR_TYPE(DegenerateSplit);
MARISCOPE_ERROR_TYPE(BinMismatch);
MARISCOPE_ERROR_TYPE(NoLineFeatures);

// registration
MARISCOPE_ERROR_TYPE(StripOutOfBounds);
MARISCOPE_ERROR_TYPE(FlatStrip);
MARISCOPE_ERROR_TYPE(DegenerateConfiguration);
MARISCOPE_ERROR_TYPE(SizeMismatch);

// foreground
MARISCOPE_ERROR_TYPE(FrameOrderViolation);

// evaluation
MARISCOPE_ERROR_TYPE(FrameMismatch);
MARISCOPE_ERROR_TYPE(EmptyList);
MARISCOPE_ERROR_TYPE(EmptySeries);
MARISCOPE_ERROR_TYPE(EmptySequence);

// synth
MARISCOPE_ERROR_TYPE(SpecOutOfBounds);

// pipeline / io
MARISCOPE_ERROR_TYPE(ManifestInvalid);
MARISCOPE_ERROR_TYPE(IoError);

#undef MARISCOPE_ERROR_TYPE

/// Pipeline stage failure; carries the stage name and the frame that broke it.
class StageFailure : public Error {
public:
    StageFailure(std::string stage, int frame_index, const std::string& what)
        : Error("stage '" + stage + "' failed at frame " + std::to_string(frame_index) + ": " + what),
          stage_(std::move(stage)),
          frame_index_(frame_index) {}

    const std::string& stage() const noexcept { return stage_; }
    int frame_index() const noexcept { return frame_index_; }

private:
    std::string stage_;
    int frame_index_;
};

}  // namespace mariscope

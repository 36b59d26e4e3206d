#pragma once

#include <stdexcept>
#include <string>

namespace courtsketch {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EncodingError : Error { using Error::Error; };
struct DecodingError : Error { using Error::Error; };
struct ValidationError : Error { using Error::Error; };
struct SegmentationError : Error { using Error::Error; };
struct IngestError : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };
struct ShapeError : Error { using Error::Error; };
struct SketchError : Error { using Error::Error; };
struct CheckpointError : Error { using Error::Error; };

}  // namespace courtsketch

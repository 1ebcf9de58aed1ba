#pragma once

#include <stdexcept>

namespace loopclean {

// Base class for every error raised by the pipeline.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FileUnreadable : Error { using Error::Error; };
struct HeaderMismatch : Error { using Error::Error; };
struct InvalidScenario : Error { using Error::Error; };
struct DegeneratePartition : Error { using Error::Error; };
struct TooFewDistinctPoints : Error { using Error::Error; };
struct TooFewPoints : Error { using Error::Error; };
struct NotInvertible : Error { using Error::Error; };
struct CurveTooShort : Error { using Error::Error; };
struct MissingFeature : Error { using Error::Error; };
struct ModelMismatch : Error { using Error::Error; };
struct EmptyCenterSet : Error { using Error::Error; };
struct EmptyCategory : Error { using Error::Error; };

}  // namespace loopclean

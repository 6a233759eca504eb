#pragma once

// Convenience umbrella for the whole toolkit.

#include "core.hpp"      // IWYU pragma: export
#include "designer.hpp"  // IWYU pragma: export
#include "errors.hpp"    // IWYU pragma: export
#include "io.hpp"        // IWYU pragma: export
#include "metrics.hpp"   // IWYU pragma: export
#include "modal.hpp"     // IWYU pragma: export
#include "noise.hpp"     // IWYU pragma: export
#include "pipeline.hpp"  // IWYU pragma: export
#include "tmm.hpp"       // IWYU pragma: export

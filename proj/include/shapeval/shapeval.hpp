#pragma once

#include "shapeval/error.hpp"
#include "shapeval/feature_metrics.hpp"
#include "shapeval/geometry/inside.hpp"
#include "shapeval/geometry/nn_index.hpp"
#include "shapeval/geometry/sampling.hpp"
#include "shapeval/geometry/types.hpp"
#include "shapeval/harness.hpp"
#include "shapeval/instance_metrics.hpp"
#include "shapeval/manifest.hpp"
#include "shapeval/mesh_io.hpp"
#include "shapeval/random.hpp"
#include "shapeval/report.hpp"
#include "shapeval/set_metrics.hpp"
#include "shapeval/tensor_io.hpp"

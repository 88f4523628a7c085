#pragma once

#include "cqregion/channel.hpp"
#include "cqregion/degradability.hpp"
#include "cqregion/infoquant.hpp"
#include "cqregion/io.hpp"
#include "cqregion/optimize.hpp"
#include "cqregion/qcore.hpp"
#include "cqregion/region.hpp"
#include "cqregion/types.hpp"
#include "cqregion/version.hpp"

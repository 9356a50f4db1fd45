#pragma once

#include "msla/errors.hpp"
#include "msla/fitness.hpp"
#include "msla/ga.hpp"
#include "msla/geometry.hpp"
#include "msla/image.hpp"
#include "msla/json_io.hpp"
#include "msla/metrics.hpp"
#include "msla/oracle.hpp"
#include "msla/palette.hpp"
#include "msla/physical.hpp"
#include "msla/png_io.hpp"
#include "msla/remote_oracle.hpp"
#include "msla/render.hpp"

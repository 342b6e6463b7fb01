#pragma once

#include "fluxshape/device.hpp"
#include "fluxshape/errors.hpp"
#include "fluxshape/extraction.hpp"
#include "fluxshape/network.hpp"
#include "fluxshape/pulse.hpp"
#include "fluxshape/rc_response.hpp"
#include "fluxshape/robustness.hpp"
#include "fluxshape/synthesis.hpp"

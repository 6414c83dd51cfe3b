#pragma once

#include "wptlab/version.hpp"
#include "wptlab/errors.hpp"
#include "wptlab/types.hpp"
#include "wptlab/numerics.hpp"
#include "wptlab/signal.hpp"
#include "wptlab/channel.hpp"
#include "wptlab/hpa.hpp"
#include "wptlab/rectenna.hpp"
#include "wptlab/waveform.hpp"
#include "wptlab/beamforming.hpp"
#include "wptlab/combining.hpp"
#include "wptlab/irs.hpp"
#include "wptlab/rate_energy.hpp"
#include "wptlab/learning.hpp"
#include "wptlab/mec.hpp"
#include "wptlab/sensing.hpp"

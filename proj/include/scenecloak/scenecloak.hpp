#pragma once

#include "scenecloak/attack.hpp"
#include "scenecloak/calibrate.hpp"
#include "scenecloak/encoder.hpp"
#include "scenecloak/errors.hpp"
#include "scenecloak/frameio.hpp"
#include "scenecloak/image.hpp"
#include "scenecloak/metrics.hpp"
#include "scenecloak/protect.hpp"
#include "scenecloak/scenes.hpp"
#include "scenecloak/synth.hpp"
#include "scenecloak/target.hpp"

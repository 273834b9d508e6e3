#pragma once

#include "astrolab/assay_engine.hpp"
#include "astrolab/color.hpp"
#include "astrolab/env_model.hpp"
#include "astrolab/geometry.hpp"
#include "astrolab/ground_station.hpp"
#include "astrolab/life_classifier.hpp"
#include "astrolab/mission_engine.hpp"
#include "astrolab/mission_log.hpp"
#include "astrolab/net.hpp"
#include "astrolab/rng.hpp"
#include "astrolab/sampling_mechanism.hpp"
#include "astrolab/sensor_suite.hpp"
#include "astrolab/telemetry.hpp"
#include "astrolab/telemetry_client.hpp"
#include "astrolab/text_config.hpp"

#pragma once

#include "biosketch/bits.hpp"
#include "biosketch/error.hpp"
#include "biosketch/eval.hpp"
#include "biosketch/fusion.hpp"
#include "biosketch/gf.hpp"
#include "biosketch/oracle.hpp"
#include "biosketch/pipeline.hpp"
#include "biosketch/quantizer.hpp"
#include "biosketch/rng.hpp"
#include "biosketch/rs.hpp"
#include "biosketch/sketch.hpp"
#include "biosketch/store.hpp"
#include "biosketch/synth.hpp"

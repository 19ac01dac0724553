#pragma once

#include "vgc/config.hpp"
#include "vgc/error.hpp"
#include "vgc/graph.hpp"
#include "vgc/grid.hpp"
#include "vgc/io.hpp"
#include "vgc/manifest.hpp"
#include "vgc/neural/layers.hpp"
#include "vgc/neural/model_spec.hpp"
#include "vgc/neural/network.hpp"
#include "vgc/reduction.hpp"
#include "vgc/report.hpp"
#include "vgc/rng.hpp"
#include "vgc/slic.hpp"
#include "vgc/synth.hpp"
#include "vgc/training.hpp"
#include "vgc/variants.hpp"
#include "vgc/volume.hpp"

#pragma once

#include "msdmad/bands.hpp"
#include "msdmad/classifier.hpp"
#include "msdmad/config.hpp"
#include "msdmad/delaunay.hpp"
#include "msdmad/embedding.hpp"
#include "msdmad/error.hpp"
#include "msdmad/features.hpp"
#include "msdmad/fusion.hpp"
#include "msdmad/geometry.hpp"
#include "msdmad/manifest.hpp"
#include "msdmad/metrics.hpp"
#include "msdmad/morph.hpp"
#include "msdmad/pipeline.hpp"
#include "msdmad/protocol.hpp"
#include "msdmad/raster.hpp"
#include "msdmad/rng.hpp"
#include "msdmad/synthetic.hpp"
#include "msdmad/text.hpp"

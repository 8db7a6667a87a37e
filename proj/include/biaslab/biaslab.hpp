#ifndef BIASLAB_BIASLAB_HPP
#define BIASLAB_BIASLAB_HPP

#include "biaslab/common.hpp"
#include "biaslab/network.hpp"
#include "biaslab/network_io.hpp"
#include "biaslab/bias.hpp"
#include "biaslab/spectral.hpp"
#include "biaslab/learn.hpp"
#include "biaslab/metrics.hpp"
#include "biaslab/rng.hpp"
#include "biaslab/builders.hpp"
#include "biaslab/media.hpp"
#include "biaslab/simlab.hpp"

#endif  // BIASLAB_BIASLAB_HPP

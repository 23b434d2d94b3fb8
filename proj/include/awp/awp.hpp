#ifndef AWP_AWP_HPP
#define AWP_AWP_HPP

#include "awp/awp_loss.hpp"
#include "awp/config.hpp"
#include "awp/ctc.hpp"
#include "awp/decode.hpp"
#include "awp/edit_distance.hpp"
#include "awp/latency.hpp"
#include "awp/logprob.hpp"
#include "awp/model.hpp"
#include "awp/properties.hpp"
#include "awp/rng.hpp"
#include "awp/sampler.hpp"
#include "awp/synth.hpp"
#include "awp/train.hpp"
#include "awp/vocab.hpp"

#endif  // AWP_AWP_HPP

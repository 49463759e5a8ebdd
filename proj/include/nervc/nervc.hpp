#pragma once

#include "nervc/autograd.hpp"
#include "nervc/bytes.hpp"
#include "nervc/config.hpp"
#include "nervc/dataset.hpp"
#include "nervc/decoder.hpp"
#include "nervc/huffman.hpp"
#include "nervc/hypernet.hpp"
#include "nervc/kernels.hpp"
#include "nervc/metrics.hpp"
#include "nervc/nerv.hpp"
#include "nervc/nrvp.hpp"
#include "nervc/parallel.hpp"
#include "nervc/quantize.hpp"
#include "nervc/rng.hpp"
#include "nervc/serial.hpp"
#include "nervc/tensor.hpp"
#include "nervc/training.hpp"

// Repackages the 10,000 MNIST digits shipped in the npm `mnist` package
// (dist/mnist.js) as gzip-compressed IDX files: 8,000 train / 2,000 test.
//
//   npm pack mnist && tar xzf mnist-*.tgz
//   node tools/npm_mnist_to_idx.js package/dist/mnist.js data/mnist-desk
'use strict';
const fs = require('fs');
const path = require('path');
const zlib = require('zlib');

const [src, outDir] = process.argv.slice(2);
if (!src || !outDir) {
  console.error('usage: npm_mnist_to_idx.js <mnist.js> <out_dir>');
  process.exit(2);
}

global.window = {};
const mod = require(path.resolve(src));
const mnist = mod && mod[0] ? mod : global.window.mnist;

const samples = [];
for (let d = 0; d < 10; d++) {
  for (let i = 0; i < mnist[d].length; i++) samples.push([mnist[d].get(i), d]);
}

// xorshift32, seed 20240601: fixed order independent of the JS engine
let state = 20240601 >>> 0;
function next() {
  state ^= state << 13; state >>>= 0;
  state ^= state >>> 17;
  state ^= state << 5; state >>>= 0;
  return state;
}
for (let i = samples.length - 1; i > 0; i--) {
  const j = next() % (i + 1);
  [samples[i], samples[j]] = [samples[j], samples[i]];
}

function writeIdx(rows, prefix) {
  const n = rows.length;
  const images = Buffer.alloc(16 + n * 784);
  images.writeUInt32BE(0x00000803, 0);
  images.writeUInt32BE(n, 4);
  images.writeUInt32BE(28, 8);
  images.writeUInt32BE(28, 12);
  const labels = Buffer.alloc(8 + n);
  labels.writeUInt32BE(0x00000801, 0);
  labels.writeUInt32BE(n, 4);
  rows.forEach(([px, label], r) => {
    for (let k = 0; k < 784; k++) images[16 + r * 784 + k] = Math.round(px[k] * 255);
    labels[8 + r] = label;
  });
  fs.writeFileSync(path.join(outDir, `${prefix}-images-idx3-ubyte.gz`), zlib.gzipSync(images, {level: 9}));
  fs.writeFileSync(path.join(outDir, `${prefix}-labels-idx1-ubyte.gz`), zlib.gzipSync(labels, {level: 9}));
}

fs.mkdirSync(outDir, {recursive: true});
writeIdx(samples.slice(0, 8000), 'train');
writeIdx(samples.slice(8000), 't10k');
console.log(`wrote ${samples.length} samples to ${outDir}`);

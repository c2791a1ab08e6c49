/** The only number formatting in the console. Every displayed figure is the
 * API payload value rounded half-even (banker's rounding); probabilities
 * show as one-decimal percent. */

/** Round to `decimals` places, ties to the even neighbor. Values within a
 * tiny band of an exact tie are treated as ties, so decimal-written payload
 * values behave as their decimal reading regardless of float representation
 * noise (e.g. 0.3325 -> 33.2%, 0.3375 -> 33.8%). */
export function roundHalfEven(value: number, decimals: number): number {
  if (!Number.isFinite(value)) {
    return value;
  }
  const sign = value < 0 ? -1 : 1;
  const scale = 10 ** decimals;
  const scaled = Math.abs(value) * scale;
  const floorPart = Math.floor(scaled);
  const fraction = scaled - floorPart;
  const TIE_BAND = 1e-9;
  let units: number;
  if (fraction > 0.5 + TIE_BAND) {
    units = floorPart + 1;
  } else if (fraction < 0.5 - TIE_BAND) {
    units = floorPart;
  } else {
    units = floorPart % 2 === 0 ? floorPart : floorPart + 1;
  }
  return (sign * units) / scale;
}

/** Probability -> "33.3%" (one decimal of percent, half-even). */
export function formatPercent(probability: number): string {
  return `${roundHalfEven(probability * 100, 1).toFixed(1)}%`;
}

/** Utility value -> fixed two decimals, half-even. */
export function formatUtility(value: number): string {
  return roundHalfEven(value, 2).toFixed(2);
}

/** Sensitivity / delta -> signed three decimals, half-even. */
export function formatSigned(value: number): string {
  const rounded = roundHalfEven(value, 3);
  const text = rounded.toFixed(3);
  return rounded > 0 ? `+${text}` : text;
}

/** Probability delta in percentage points, signed: +12.4%, -0.3%, 0.0%. */
export function formatSignedPercent(delta: number): string {
  const rounded = roundHalfEven(delta * 100, 1);
  const text = `${rounded.toFixed(1)}%`;
  return rounded > 0 ? `+${text}` : text;
}

/** Conflict surprise ratio -> "x13.7" (one decimal, half-even). */
export function formatSurprise(ratio: number): string {
  return `×${roundHalfEven(ratio, 1).toFixed(1)}`;
}

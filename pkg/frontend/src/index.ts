export { CsvTable, SchemaError, column, numeric, parseCsv, readCsv, requireColumns } from "./csv.js";
export { CRITICAL_LAWS, FigureKind, FigureSpec, ReferenceLine, render } from "./figures.js";
export { AxesSpec, Series, renderSvg } from "./svg.js";

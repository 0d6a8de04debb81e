import { boot } from "./ui.js";

boot();

import { mountApp } from "./app.js";

const root = document.getElementById("app-root");
if (root === null) {
  throw new Error("index.html must contain <div id=\"app-root\">");
}
mountApp(root);
